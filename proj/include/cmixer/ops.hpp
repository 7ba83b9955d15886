#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>

#include "cmixer/tensor.hpp"

namespace cmixer::ad {

enum class Activation { Gelu, Relu };

namespace detail {

template <typename T>
using MatMap = Eigen::Map<Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
template <typename T>
using ConstMatMap =
    Eigen::Map<const Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
template <typename T>
using ConstRowMap = Eigen::Map<const Eigen::Matrix<T, 1, Eigen::Dynamic>>;
template <typename T>
using RowMap = Eigen::Map<Eigen::Matrix<T, 1, Eigen::Dynamic>>;

// tanh-form GELU; the leading constant is sqrt(2/pi) truncated as documented.
inline constexpr double kGeluScale = 0.7978845608;
inline constexpr double kGeluCubic = 0.044715;

template <typename T>
T gelu_value(T x) {
    const T u = T(kGeluScale) * (x + T(kGeluCubic) * x * x * x);
    return T(0.5) * x * (T(1) + std::tanh(u));
}

template <typename T>
T gelu_derivative(T x) {
    const T u = T(kGeluScale) * (x + T(kGeluCubic) * x * x * x);
    const T t = std::tanh(u);
    const T du = T(kGeluScale) * (T(1) + T(3) * T(kGeluCubic) * x * x);
    return T(0.5) * (T(1) + t) + T(0.5) * x * (T(1) - t * t) * du;
}

// dst has src's shape with axes a and b swapped. dst[swap(coords)] = src[coords].
template <typename T, bool Accumulate>
void swap_axes_copy(const T* src, T* dst, const std::vector<int>& in_shape, int a, int b) {
    const int rank = static_cast<int>(in_shape.size());
    std::vector<std::int64_t> in_strides(rank, 1), out_strides(rank, 1);
    std::vector<int> out_shape(in_shape);
    std::swap(out_shape[a], out_shape[b]);
    for (int d = rank - 2; d >= 0; --d) {
        in_strides[d] = in_strides[d + 1] * in_shape[d + 1];
        out_strides[d] = out_strides[d + 1] * out_shape[d + 1];
    }
    // out stride of the source axis d is the stride of its swapped position
    std::vector<std::int64_t> map_strides(in_strides);
    for (int d = 0; d < rank; ++d) {
        int od = d == a ? b : (d == b ? a : d);
        map_strides[d] = out_strides[od];
    }
    const std::int64_t total = numel_of(in_shape);
    std::vector<int> coord(rank, 0);
    for (std::int64_t i = 0, j = 0; i < total; ++i) {
        if constexpr (Accumulate) {
            dst[j] += src[i];
        } else {
            dst[j] = src[i];
        }
        for (int d = rank - 1; d >= 0; --d) {
            ++coord[d];
            j += map_strides[d];
            if (coord[d] < in_shape[d]) break;
            j -= map_strides[d] * in_shape[d];
            coord[d] = 0;
        }
    }
}

}  // namespace detail

/// y[..., o] = sum_i W[o, i] * x[..., i] + b[o], broadcast over leading dims.
template <typename T>
TensorPtr<T> affine(Tape<T>* tape, const TensorPtr<T>& x, const TensorPtr<T>& w,
                    const TensorPtr<T>& b) {
    if (w->shape.size() != 2) throw ShapeError("affine: weight must be rank 2, got " + shape_str(w->shape));
    const int out = w->shape[0];
    const int in = w->shape[1];
    if (x->shape.empty() || x->shape.back() != in) throw_shape_error("affine", x->shape, w->shape);
    if (b->shape.size() != 1 || b->shape[0] != out) throw_shape_error("affine", b->shape, w->shape);

    std::vector<int> out_shape(x->shape);
    out_shape.back() = out;
    auto y = make_tensor<T>(out_shape);
    const std::int64_t rows = x->numel() / in;

    detail::ConstMatMap<T> X(x->value.data(), rows, in);
    detail::ConstMatMap<T> W(w->value.data(), out, in);
    detail::MatMap<T> Y(y->value.data(), rows, out);
    Y.noalias() = X * W.transpose();
    Y.rowwise() += detail::ConstRowMap<T>(b->value.data(), out);

    if (tape) {
        tape->record({x, w, b}, y, [x, w, b, y, rows, in, out]() {
            detail::ConstMatMap<T> dY(y->grad.data(), rows, out);
            detail::ConstMatMap<T> X(x->value.data(), rows, in);
            detail::ConstMatMap<T> W(w->value.data(), out, in);
            detail::MatMap<T>(x->grad.data(), rows, in).noalias() += dY * W;
            detail::MatMap<T>(w->grad.data(), out, in).noalias() += dY.transpose() * X;
            detail::RowMap<T>(b->grad.data(), out) += dY.colwise().sum();
        });
    }
    return y;
}

/// Normalizes each trailing-D slice to zero mean and unit population variance,
/// then applies elementwise gain and bias. eps sits inside the square root.
template <typename T>
TensorPtr<T> layer_norm(Tape<T>* tape, const TensorPtr<T>& x, const TensorPtr<T>& gain,
                        const TensorPtr<T>& bias, T eps = T(1e-5)) {
    if (x->shape.empty()) throw ShapeError("layer_norm: input must have rank >= 1");
    const int d = x->shape.back();
    if (d < 2) throw std::invalid_argument("layer_norm: trailing dimension must be >= 2");
    if (gain->shape.size() != 1 || gain->shape[0] != d) throw_shape_error("layer_norm", gain->shape, x->shape);
    if (bias->shape.size() != 1 || bias->shape[0] != d) throw_shape_error("layer_norm", bias->shape, x->shape);

    const std::int64_t rows = x->numel() / d;
    auto y = make_tensor<T>(x->shape);
    auto normalized = std::make_shared<std::vector<T>>(x->value.size());
    auto inv_std = std::make_shared<std::vector<T>>(rows);

    for (std::int64_t r = 0; r < rows; ++r) {
        const T* xs = x->value.data() + r * d;
        T* ys = y->value.data() + r * d;
        T* ns = normalized->data() + r * d;
        T mean = T(0);
        for (int i = 0; i < d; ++i) mean += xs[i];
        mean /= T(d);
        T var = T(0);
        for (int i = 0; i < d; ++i) {
            const T c = xs[i] - mean;
            var += c * c;
        }
        var /= T(d);
        const T istd = T(1) / std::sqrt(var + eps);
        (*inv_std)[r] = istd;
        for (int i = 0; i < d; ++i) {
            ns[i] = (xs[i] - mean) * istd;
            ys[i] = gain->value[i] * ns[i] + bias->value[i];
        }
    }

    if (tape) {
        tape->record({x, gain, bias}, y, [x, gain, bias, y, normalized, inv_std, rows, d]() {
            for (std::int64_t r = 0; r < rows; ++r) {
                const T* dy = y->grad.data() + r * d;
                const T* ns = normalized->data() + r * d;
                T* dx = x->grad.data() + r * d;
                T dn_mean = T(0), dn_dot = T(0);
                for (int i = 0; i < d; ++i) {
                    const T dn = dy[i] * gain->value[i];
                    dn_mean += dn;
                    dn_dot += dn * ns[i];
                    gain->grad[i] += dy[i] * ns[i];
                    bias->grad[i] += dy[i];
                }
                dn_mean /= T(d);
                dn_dot /= T(d);
                const T istd = (*inv_std)[r];
                for (int i = 0; i < d; ++i) {
                    const T dn = dy[i] * gain->value[i];
                    dx[i] += istd * (dn - dn_mean - ns[i] * dn_dot);
                }
            }
        });
    }
    return y;
}

template <typename T>
TensorPtr<T> gelu(Tape<T>* tape, const TensorPtr<T>& x) {
    auto y = make_tensor<T>(x->shape);
    for (std::size_t i = 0; i < x->value.size(); ++i) y->value[i] = detail::gelu_value(x->value[i]);
    if (tape) {
        tape->record({x}, y, [x, y]() {
            for (std::size_t i = 0; i < x->value.size(); ++i) {
                x->grad[i] += y->grad[i] * detail::gelu_derivative(x->value[i]);
            }
        });
    }
    return y;
}

template <typename T>
TensorPtr<T> relu(Tape<T>* tape, const TensorPtr<T>& x) {
    auto y = make_tensor<T>(x->shape);
    for (std::size_t i = 0; i < x->value.size(); ++i) {
        y->value[i] = x->value[i] > T(0) ? x->value[i] : T(0);
    }
    if (tape) {
        tape->record({x}, y, [x, y]() {
            for (std::size_t i = 0; i < x->value.size(); ++i) {
                if (x->value[i] > T(0)) x->grad[i] += y->grad[i];
            }
        });
    }
    return y;
}

template <typename T>
TensorPtr<T> apply_activation(Tape<T>* tape, const TensorPtr<T>& x, Activation act) {
    return act == Activation::Gelu ? gelu(tape, x) : relu(tape, x);
}

template <typename T>
TensorPtr<T> add(Tape<T>* tape, const TensorPtr<T>& a, const TensorPtr<T>& b) {
    if (a->shape != b->shape) throw_shape_error("add", a->shape, b->shape);
    auto y = make_tensor<T>(a->shape);
    for (std::size_t i = 0; i < y->value.size(); ++i) y->value[i] = a->value[i] + b->value[i];
    if (tape) {
        tape->record({a, b}, y, [a, b, y]() {
            for (std::size_t i = 0; i < y->value.size(); ++i) {
                a->grad[i] += y->grad[i];
                b->grad[i] += y->grad[i];
            }
        });
    }
    return y;
}

template <typename T>
TensorPtr<T> reshape(Tape<T>* tape, const TensorPtr<T>& x, std::vector<int> shape) {
    if (numel_of(shape) != x->numel()) throw_shape_error("reshape", x->shape, shape);
    auto y = make_tensor<T>(std::move(shape), x->value);
    if (tape) {
        tape->record({x}, y, [x, y]() {
            for (std::size_t i = 0; i < x->value.size(); ++i) x->grad[i] += y->grad[i];
        });
    }
    return y;
}

template <typename T>
TensorPtr<T> swap_axes(Tape<T>* tape, const TensorPtr<T>& x, int a, int b) {
    const int rank = static_cast<int>(x->shape.size());
    if (a < 0) a += rank;
    if (b < 0) b += rank;
    if (a < 0 || a >= rank || b < 0 || b >= rank) {
        throw std::invalid_argument("swap_axes: axis out of range for " + shape_str(x->shape));
    }
    std::vector<int> out_shape(x->shape);
    std::swap(out_shape[a], out_shape[b]);
    auto y = make_tensor<T>(out_shape);
    detail::swap_axes_copy<T, false>(x->value.data(), y->value.data(), x->shape, a, b);
    if (tape) {
        const std::vector<int> in_shape = x->shape;
        tape->record({x}, y, [x, y, in_shape, a, b]() {
            // swapping the same axes inverts the permutation
            std::vector<int> swapped(in_shape);
            std::swap(swapped[a], swapped[b]);
            detail::swap_axes_copy<T, true>(y->grad.data(), x->grad.data(), swapped, a, b);
        });
    }
    return y;
}

template <typename T>
TensorPtr<T> transpose_last2(Tape<T>* tape, const TensorPtr<T>& x) {
    if (x->shape.size() < 2) throw ShapeError("transpose_last2: input must have rank >= 2");
    const int rank = static_cast<int>(x->shape.size());
    return swap_axes(tape, x, rank - 2, rank - 1);
}

/// Even-index elements of the trailing dimension (the real lanes of an
/// interleaved complex vector).
template <typename T>
TensorPtr<T> take_even(Tape<T>* tape, const TensorPtr<T>& x) {
    if (x->shape.empty() || x->shape.back() % 2 != 0) {
        throw ShapeError("take_even: trailing dimension must be even, got " + shape_str(x->shape));
    }
    const int d = x->shape.back();
    const int half = d / 2;
    std::vector<int> out_shape(x->shape);
    out_shape.back() = half;
    auto y = make_tensor<T>(out_shape);
    const std::int64_t rows = x->numel() / d;
    for (std::int64_t r = 0; r < rows; ++r) {
        for (int k = 0; k < half; ++k) y->value[r * half + k] = x->value[r * d + 2 * k];
    }
    if (tape) {
        tape->record({x}, y, [x, y, rows, d, half]() {
            for (std::int64_t r = 0; r < rows; ++r) {
                for (int k = 0; k < half; ++k) x->grad[r * d + 2 * k] += y->grad[r * half + k];
            }
        });
    }
    return y;
}

template <typename T>
TensorPtr<T> take_odd(Tape<T>* tape, const TensorPtr<T>& x) {
    if (x->shape.empty() || x->shape.back() % 2 != 0) {
        throw ShapeError("take_odd: trailing dimension must be even, got " + shape_str(x->shape));
    }
    const int d = x->shape.back();
    const int half = d / 2;
    std::vector<int> out_shape(x->shape);
    out_shape.back() = half;
    auto y = make_tensor<T>(out_shape);
    const std::int64_t rows = x->numel() / d;
    for (std::int64_t r = 0; r < rows; ++r) {
        for (int k = 0; k < half; ++k) y->value[r * half + k] = x->value[r * d + 2 * k + 1];
    }
    if (tape) {
        tape->record({x}, y, [x, y, rows, d, half]() {
            for (std::int64_t r = 0; r < rows; ++r) {
                for (int k = 0; k < half; ++k) x->grad[r * d + 2 * k + 1] += y->grad[r * half + k];
            }
        });
    }
    return y;
}

/// Inverse of take_even/take_odd: weaves two [..., X] tensors into [..., 2X].
template <typename T>
TensorPtr<T> interleave(Tape<T>* tape, const TensorPtr<T>& re, const TensorPtr<T>& im) {
    if (re->shape != im->shape) throw_shape_error("interleave", re->shape, im->shape);
    const int half = re->shape.back();
    std::vector<int> out_shape(re->shape);
    out_shape.back() = 2 * half;
    auto y = make_tensor<T>(out_shape);
    const std::int64_t rows = re->numel() / half;
    for (std::int64_t r = 0; r < rows; ++r) {
        for (int k = 0; k < half; ++k) {
            y->value[r * 2 * half + 2 * k] = re->value[r * half + k];
            y->value[r * 2 * half + 2 * k + 1] = im->value[r * half + k];
        }
    }
    if (tape) {
        tape->record({re, im}, y, [re, im, y, rows, half]() {
            for (std::int64_t r = 0; r < rows; ++r) {
                for (int k = 0; k < half; ++k) {
                    re->grad[r * half + k] += y->grad[r * 2 * half + 2 * k];
                    im->grad[r * half + k] += y->grad[r * 2 * half + 2 * k + 1];
                }
            }
        });
    }
    return y;
}

template <typename T>
TensorPtr<T> sum(Tape<T>* tape, const TensorPtr<T>& x) {
    auto y = make_tensor<T>(std::vector<int>{1});
    double acc = 0.0;
    for (T v : x->value) acc += static_cast<double>(v);
    y->value[0] = static_cast<T>(acc);
    if (tape) {
        tape->record({x}, y, [x, y]() {
            for (std::size_t i = 0; i < x->value.size(); ++i) x->grad[i] += y->grad[0];
        });
    }
    return y;
}

/// Sample-normalized squared error: sum of squared differences over every
/// element, divided by the leading (batch) dimension.
template <typename T>
TensorPtr<T> mse_loss(Tape<T>* tape, const TensorPtr<T>& pred, const TensorPtr<T>& target) {
    if (pred->shape != target->shape) throw_shape_error("mse_loss", pred->shape, target->shape);
    if (pred->shape.empty()) throw ShapeError("mse_loss: input must have rank >= 1");
    const T batch = static_cast<T>(pred->shape[0]);
    auto y = make_tensor<T>(std::vector<int>{1});
    double acc = 0.0;
    for (std::size_t i = 0; i < pred->value.size(); ++i) {
        const double diff = static_cast<double>(pred->value[i]) - static_cast<double>(target->value[i]);
        acc += diff * diff;
    }
    y->value[0] = static_cast<T>(acc / static_cast<double>(batch));
    if (tape) {
        tape->record({pred, target}, y, [pred, target, y, batch]() {
            const T scale = T(2) / batch * y->grad[0];
            for (std::size_t i = 0; i < pred->value.size(); ++i) {
                const T diff = pred->value[i] - target->value[i];
                pred->grad[i] += scale * diff;
                target->grad[i] -= scale * diff;
            }
        });
    }
    return y;
}

}  // namespace cmixer::ad
