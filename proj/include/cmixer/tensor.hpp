#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace cmixer::ad {

struct ShapeError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

inline std::string shape_str(const std::vector<int>& shape) {
    std::ostringstream os;
    os << '[';
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) os << ',';
        os << shape[i];
    }
    os << ']';
    return os.str();
}

[[noreturn]] inline void throw_shape_error(const char* op, const std::vector<int>& a,
                                           const std::vector<int>& b) {
    throw ShapeError(std::string(op) + ": incompatible shapes " + shape_str(a) + " and " +
                     shape_str(b));
}

inline std::int64_t numel_of(const std::vector<int>& shape) {
    std::int64_t n = 1;
    for (int d : shape) {
        if (d <= 0) throw ShapeError("dimension must be positive in " + shape_str(shape));
        n *= d;
    }
    return n;
}

/// Dense real tensor node. `grad` stays empty until backward touches it.
template <typename T>
struct Tensor {
    std::vector<int> shape;
    std::vector<T> value;
    std::vector<T> grad;
    bool requires_grad = false;

    std::int64_t numel() const { return static_cast<std::int64_t>(value.size()); }

    void ensure_grad() {
        if (grad.size() != value.size()) grad.assign(value.size(), T(0));
    }

    void zero_grad() {
        if (!grad.empty()) std::fill(grad.begin(), grad.end(), T(0));
    }
};

template <typename T>
using TensorPtr = std::shared_ptr<Tensor<T>>;

template <typename T>
TensorPtr<T> make_tensor(std::vector<int> shape, bool requires_grad = false) {
    auto t = std::make_shared<Tensor<T>>();
    const std::int64_t n = numel_of(shape);
    t->shape = std::move(shape);
    t->value.assign(static_cast<std::size_t>(n), T(0));
    t->requires_grad = requires_grad;
    return t;
}

template <typename T>
TensorPtr<T> make_tensor(std::vector<int> shape, std::vector<T> data, bool requires_grad = false) {
    auto t = std::make_shared<Tensor<T>>();
    if (numel_of(shape) != static_cast<std::int64_t>(data.size())) {
        throw ShapeError("data length " + std::to_string(data.size()) + " does not match shape " +
                         shape_str(shape));
    }
    t->shape = std::move(shape);
    t->value = std::move(data);
    t->requires_grad = requires_grad;
    return t;
}

template <typename T>
TensorPtr<T> full_like_shape(std::vector<int> shape, T fill, bool requires_grad = false) {
    auto t = make_tensor<T>(std::move(shape), requires_grad);
    std::fill(t->value.begin(), t->value.end(), fill);
    return t;
}

/// Records one applied operation: input/output nodes plus the rule that
/// propagates output.grad into the inputs' grads.
template <typename T>
class Tape {
public:
    struct Record {
        std::vector<TensorPtr<T>> inputs;
        TensorPtr<T> output;
        std::function<void()> pull;  // accumulates into input grads
    };

    void record(std::vector<TensorPtr<T>> inputs, TensorPtr<T> output, std::function<void()> pull) {
        records_.push_back(Record{std::move(inputs), std::move(output), std::move(pull)});
    }

    const std::vector<Record>& records() const { return records_; }
    std::size_t size() const { return records_.size(); }
    void clear() { records_.clear(); }

private:
    std::vector<Record> records_;
};

/// Reverse sweep: seeds d(loss)/d(loss) = 1 and walks the tape backwards.
/// Records are appended in execution order, so the reverse walk is a valid
/// topological order and each node is visited exactly once. Gradients of
/// tensors feeding several operations accumulate by summation.
template <typename T>
void backward(const TensorPtr<T>& loss, Tape<T>& tape) {
    if (!loss) throw std::invalid_argument("backward: null loss tensor");
    if (loss->numel() != 1) {
        throw std::invalid_argument("backward: loss must be scalar, got shape " +
                                    shape_str(loss->shape));
    }
    for (const auto& rec : tape.records()) {
        for (const auto& in : rec.inputs) in->ensure_grad();
        rec.output->ensure_grad();
    }
    loss->ensure_grad();
    loss->grad[0] += T(1);
    const auto& recs = tape.records();
    for (auto it = recs.rbegin(); it != recs.rend(); ++it) {
        it->pull();
    }
}

template <typename T>
void zero_grads(const std::vector<TensorPtr<T>>& tensors) {
    for (const auto& t : tensors) t->zero_grad();
}

}  // namespace cmixer::ad
