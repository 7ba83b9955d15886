#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "cmixer/ops.hpp"
#include "cmixer/optim.hpp"
#include "cmixer/rng.hpp"
#include "cmixer/tensor.hpp"

namespace cmixer::net {

using ad::Activation;
using ad::Tape;
using ad::TensorPtr;

/// How one mixing block maps a normalized (X, 2) slice back onto itself.
/// Cmlp runs one 2X -> S -> 2X MLP over the interleaved real/imag vector;
/// RealParallel runs two independent X -> S -> X MLPs, one per lane,
/// keeping the same 4XS multiply count.
enum class MixerKind { Cmlp, RealParallel };

enum class ModelVariant {
    CMixer,            // CMLP space + CMLP frequency
    MixerMlpSpace,     // real-parallel space, CMLP frequency
    MixerMlpFreq,      // CMLP space, real-parallel frequency
    RealParallelMixer, // real-parallel both
    PureMlpBaseline,   // flat MLP, widths matched to CMixer's parameter count
};

std::string to_string(ModelVariant v);
ModelVariant variant_from_string(const std::string& s);
std::string to_string(Activation a);
Activation activation_from_string(const std::string& s);

struct ModelDescriptor {
    ModelVariant variant = ModelVariant::CMixer;
    int K = 5;
    int n_t = 32;
    int n_c = 32;
    int n_t_prime = 32;
    int n_c_prime = 32;
    int s_t = 128;
    int s_c = 128;
    int n_t0 = 5;
    int n_c0 = 5;
    Activation activation = Activation::Gelu;

    MixerKind space_kind() const {
        return (variant == ModelVariant::MixerMlpSpace || variant == ModelVariant::RealParallelMixer)
                   ? MixerKind::RealParallel
                   : MixerKind::Cmlp;
    }
    MixerKind freq_kind() const {
        return (variant == ModelVariant::MixerMlpFreq || variant == ModelVariant::RealParallelMixer)
                   ? MixerKind::RealParallel
                   : MixerKind::Cmlp;
    }

    bool operator==(const ModelDescriptor&) const = default;
};

void validate(const ModelDescriptor& desc);

template <typename T>
struct MixBlock {
    MixerKind kind = MixerKind::Cmlp;
    int x = 0;  // complex width
    int s = 0;  // hidden width
    // Cmlp
    TensorPtr<T> w1, b1, w2, b2;
    // RealParallel
    TensorPtr<T> re_w1, re_b1, re_w2, re_b2;
    TensorPtr<T> im_w1, im_b1, im_w2, im_b2;
};

template <typename T>
struct MixerLayer {
    TensorPtr<T> ln_space_gain, ln_space_bias;  // [2 * n_t']
    MixBlock<T> sm;
    TensorPtr<T> ln_freq_gain, ln_freq_bias;  // [2 * n_c']
    MixBlock<T> fm;
};

template <typename T>
struct AffinePair {
    TensorPtr<T> w, b;
};

template <typename T>
struct Model {
    ModelDescriptor desc;

    // mixer family
    AffinePair<T> embed_ant, embed_sub;
    std::vector<MixerLayer<T>> layers;
    AffinePair<T> head_ant, head_sub;

    // pure-MLP baseline
    std::vector<AffinePair<T>> mlp;

    std::vector<TensorPtr<T>> parameters() const;
    std::vector<std::string> parameter_names() const;
};

/// Hidden width of the 3-hidden-layer baseline chosen so its parameter
/// count lands closest to the CMixer configuration it is compared against.
int baseline_hidden_width(const ModelDescriptor& desc);

/// Learnable scalar count from the descriptor alone.
std::int64_t count_params(const ModelDescriptor& desc);

struct FlopStage {
    std::string name;
    std::int64_t macs = 0;
};

/// Forward multiply-accumulate count per sample, itemized per stage.
/// Activations, layer norms and bias adds are excluded.
std::vector<FlopStage> count_macs(const ModelDescriptor& desc);

struct FlopConvention {
    int flops_per_mac = 1;  // the reported figure counts one FLOP per MAC
};

std::int64_t count_flops(const ModelDescriptor& desc, FlopConvention conv = {});

// ---------------------------------------------------------------------------
// building
// ---------------------------------------------------------------------------

namespace detail {

template <typename T>
TensorPtr<T> init_weight(int out, int in, Rng& rng) {
    auto w = ad::make_tensor<T>({out, in}, true);
    const double bound = 1.0 / std::sqrt(static_cast<double>(in));
    for (auto& v : w->value) v = static_cast<T>(rng.uniform(-bound, bound));
    return w;
}

template <typename T>
TensorPtr<T> init_bias(int out) {
    return ad::make_tensor<T>({out}, true);
}

template <typename T>
MixBlock<T> build_mix_block(MixerKind kind, int x, int s, std::uint64_t seed, std::uint64_t& idx) {
    MixBlock<T> blk;
    blk.kind = kind;
    blk.x = x;
    blk.s = s;
    const auto next_rng = [&]() { return Rng(derive_seed(seed, idx++)); };
    if (kind == MixerKind::Cmlp) {
        Rng r1 = next_rng();
        blk.w1 = init_weight<T>(s, 2 * x, r1);
        blk.b1 = init_bias<T>(s);
        Rng r2 = next_rng();
        blk.w2 = init_weight<T>(2 * x, s, r2);
        blk.b2 = init_bias<T>(2 * x);
    } else {
        Rng r1 = next_rng();
        blk.re_w1 = init_weight<T>(s, x, r1);
        blk.re_b1 = init_bias<T>(s);
        Rng r2 = next_rng();
        blk.re_w2 = init_weight<T>(x, s, r2);
        blk.re_b2 = init_bias<T>(x);
        Rng r3 = next_rng();
        blk.im_w1 = init_weight<T>(s, x, r3);
        blk.im_b1 = init_bias<T>(s);
        Rng r4 = next_rng();
        blk.im_w2 = init_weight<T>(x, s, r4);
        blk.im_b2 = init_bias<T>(x);
    }
    return blk;
}

}  // namespace detail

template <typename T>
Model<T> build_model(const ModelDescriptor& desc, std::uint64_t seed) {
    validate(desc);
    Model<T> model;
    model.desc = desc;
    std::uint64_t idx = 0;
    const auto next_rng = [&]() { return Rng(derive_seed(seed, idx++)); };

    if (desc.variant == ModelVariant::PureMlpBaseline) {
        const int in = 2 * desc.n_t0 * desc.n_c0;
        const int out = 2 * desc.n_t * desc.n_c;
        const int w = baseline_hidden_width(desc);
        const std::vector<std::pair<int, int>> dims = {{in, w}, {w, w}, {w, w}, {w, out}};
        for (auto [i, o] : dims) {
            Rng r = next_rng();
            model.mlp.push_back({detail::init_weight<T>(o, i, r), detail::init_bias<T>(o)});
        }
        return model;
    }

    Rng re = next_rng();
    model.embed_ant = {detail::init_weight<T>(2 * desc.n_t_prime, 2 * desc.n_t0, re),
                       detail::init_bias<T>(2 * desc.n_t_prime)};
    Rng rs = next_rng();
    model.embed_sub = {detail::init_weight<T>(2 * desc.n_c_prime, 2 * desc.n_c0, rs),
                       detail::init_bias<T>(2 * desc.n_c_prime)};
    for (int k = 0; k < desc.K; ++k) {
        MixerLayer<T> layer;
        layer.ln_space_gain = ad::full_like_shape<T>({2 * desc.n_t_prime}, T(1), true);
        layer.ln_space_bias = ad::make_tensor<T>({2 * desc.n_t_prime}, true);
        layer.sm = detail::build_mix_block<T>(desc.space_kind(), desc.n_t_prime, desc.s_t, seed, idx);
        layer.ln_freq_gain = ad::full_like_shape<T>({2 * desc.n_c_prime}, T(1), true);
        layer.ln_freq_bias = ad::make_tensor<T>({2 * desc.n_c_prime}, true);
        layer.fm = detail::build_mix_block<T>(desc.freq_kind(), desc.n_c_prime, desc.s_c, seed, idx);
        model.layers.push_back(std::move(layer));
    }
    Rng rha = next_rng();
    model.head_ant = {detail::init_weight<T>(2 * desc.n_t, 2 * desc.n_t_prime, rha),
                      detail::init_bias<T>(2 * desc.n_t)};
    Rng rhs = next_rng();
    model.head_sub = {detail::init_weight<T>(2 * desc.n_c, 2 * desc.n_c_prime, rhs),
                      detail::init_bias<T>(2 * desc.n_c)};
    return model;
}

// ---------------------------------------------------------------------------
// forward passes
// ---------------------------------------------------------------------------

/// Applies one mixing block to the flattened slice representation [..., 2X].
template <typename T>
TensorPtr<T> mix_block_forward_flat(Tape<T>* tape, const MixBlock<T>& blk, const TensorPtr<T>& x,
                                    Activation act) {
    if (blk.kind == MixerKind::Cmlp) {
        auto h = ad::affine(tape, x, blk.w1, blk.b1);
        h = ad::apply_activation(tape, h, act);
        return ad::affine(tape, h, blk.w2, blk.b2);
    }
    auto re = ad::take_even(tape, x);
    auto im = ad::take_odd(tape, x);
    auto hr = ad::affine(tape, re, blk.re_w1, blk.re_b1);
    hr = ad::apply_activation(tape, hr, act);
    hr = ad::affine(tape, hr, blk.re_w2, blk.re_b2);
    auto hi = ad::affine(tape, im, blk.im_w1, blk.im_b1);
    hi = ad::apply_activation(tape, hi, act);
    hi = ad::affine(tape, hi, blk.im_w2, blk.im_b2);
    return ad::interleave(tape, hr, hi);
}

/// Complex-width-preserving block application on [..., X, 2] input: flatten
/// each (X, 2) slice to the interleaved 2X vector, run the block, unflatten.
template <typename T>
TensorPtr<T> cmlp_forward(Tape<T>* tape, const MixBlock<T>& blk, const TensorPtr<T>& x,
                          Activation act) {
    if (x->shape.size() < 2 || x->shape.back() != 2 || x->shape[x->shape.size() - 2] != blk.x) {
        throw ad::ShapeError("cmlp_forward: expected trailing shape [" + std::to_string(blk.x) +
                             ",2], got " + ad::shape_str(x->shape));
    }
    std::vector<int> flat_shape(x->shape.begin(), x->shape.end() - 2);
    flat_shape.push_back(2 * blk.x);
    auto flat = ad::reshape(tape, x, flat_shape);
    auto out = mix_block_forward_flat(tape, blk, flat, act);
    return ad::reshape(tape, out, x->shape);
}

/// One interleaved mixing layer on [B, n_c', n_t', 2] (or unbatched rank 3):
/// space mixing with residual across the antenna dimension of every
/// subcarrier slice, then frequency mixing across the subcarrier dimension
/// of every antenna slice. Both stages share their block parameters across
/// the slices they sweep.
template <typename T>
TensorPtr<T> mixer_layer_forward(Tape<T>* tape, const MixerLayer<T>& layer, const TensorPtr<T>& input,
                                 Activation act) {
    TensorPtr<T> x = input;
    const bool batched = x->shape.size() == 4;
    if (!batched) {
        if (x->shape.size() != 3) {
            throw ad::ShapeError("mixer_layer_forward: expected rank 3 or 4, got " +
                                 ad::shape_str(x->shape));
        }
        x = ad::reshape(tape, x, {1, x->shape[0], x->shape[1], x->shape[2]});
    }
    const int b = x->shape[0], ncp = x->shape[1], ntp = x->shape[2];
    if (x->shape[3] != 2 || ntp != layer.sm.x || ncp != layer.fm.x) {
        throw ad::ShapeError("mixer_layer_forward: input " + ad::shape_str(input->shape) +
                             " does not match layer widths");
    }

    auto xf = ad::reshape(tape, x, {b, ncp, 2 * ntp});
    auto h = ad::layer_norm(tape, xf, layer.ln_space_gain, layer.ln_space_bias);
    h = mix_block_forward_flat(tape, layer.sm, h, act);
    auto vf = ad::add(tape, xf, h);

    auto v = ad::reshape(tape, vf, {b, ncp, ntp, 2});
    auto vs = ad::swap_axes(tape, v, 1, 2);  // [B, n_t', n_c', 2]
    auto vsf = ad::reshape(tape, vs, {b, ntp, 2 * ncp});
    auto g = ad::layer_norm(tape, vsf, layer.ln_freq_gain, layer.ln_freq_bias);
    g = mix_block_forward_flat(tape, layer.fm, g, act);
    auto of = ad::add(tape, vsf, g);

    auto os = ad::reshape(tape, of, {b, ntp, ncp, 2});
    auto out = ad::swap_axes(tape, os, 1, 2);
    if (!batched) out = ad::reshape(tape, out, input->shape);
    return out;
}

/// Full forward pass: known channel [B, n_c0, n_t0, 2] (or unbatched rank 3)
/// to predicted channel [B, n_c, n_t, 2].
template <typename T>
TensorPtr<T> model_forward(Tape<T>* tape, const Model<T>& model, const TensorPtr<T>& input) {
    const ModelDescriptor& d = model.desc;
    TensorPtr<T> x = input;
    const bool batched = x->shape.size() == 4;
    if (!batched) {
        if (x->shape.size() != 3) {
            throw ad::ShapeError("model_forward: expected rank 3 or 4, got " +
                                 ad::shape_str(x->shape));
        }
        x = ad::reshape(tape, x, {1, x->shape[0], x->shape[1], x->shape[2]});
    }
    const int b = x->shape[0];
    if (x->shape[1] != d.n_c0 || x->shape[2] != d.n_t0 || x->shape[3] != 2) {
        throw ad::ShapeError("model_forward: input " + ad::shape_str(input->shape) +
                             " does not match known-channel shape");
    }

    TensorPtr<T> out;
    if (d.variant == ModelVariant::PureMlpBaseline) {
        auto h = ad::reshape(tape, x, {b, 2 * d.n_t0 * d.n_c0});
        for (std::size_t i = 0; i < model.mlp.size(); ++i) {
            h = ad::affine(tape, h, model.mlp[i].w, model.mlp[i].b);
            if (i + 1 < model.mlp.size()) h = ad::apply_activation(tape, h, d.activation);
        }
        out = ad::reshape(tape, h, {b, d.n_c, d.n_t, 2});
    } else {
        auto h = ad::reshape(tape, x, {b, d.n_c0, 2 * d.n_t0});
        h = ad::affine(tape, h, model.embed_ant.w, model.embed_ant.b);
        h = ad::reshape(tape, h, {b, d.n_c0, d.n_t_prime, 2});
        h = ad::swap_axes(tape, h, 1, 2);
        h = ad::reshape(tape, h, {b, d.n_t_prime, 2 * d.n_c0});
        h = ad::affine(tape, h, model.embed_sub.w, model.embed_sub.b);
        h = ad::reshape(tape, h, {b, d.n_t_prime, d.n_c_prime, 2});
        h = ad::swap_axes(tape, h, 1, 2);  // [B, n_c', n_t', 2]
        for (const auto& layer : model.layers) {
            h = mixer_layer_forward(tape, layer, h, d.activation);
        }
        h = ad::reshape(tape, h, {b, d.n_c_prime, 2 * d.n_t_prime});
        h = ad::affine(tape, h, model.head_ant.w, model.head_ant.b);
        h = ad::reshape(tape, h, {b, d.n_c_prime, d.n_t, 2});
        h = ad::swap_axes(tape, h, 1, 2);
        h = ad::reshape(tape, h, {b, d.n_t, 2 * d.n_c_prime});
        h = ad::affine(tape, h, model.head_sub.w, model.head_sub.b);
        h = ad::reshape(tape, h, {b, d.n_t, d.n_c, 2});
        out = ad::swap_axes(tape, h, 1, 2);  // [B, n_c, n_t, 2]
    }
    if (!batched) out = ad::reshape(tape, out, {out->shape[1], out->shape[2], out->shape[3]});
    return out;
}

// ---------------------------------------------------------------------------
// parameter registry
// ---------------------------------------------------------------------------

namespace detail {

template <typename T>
void push_block(const MixBlock<T>& blk, const std::string& prefix,
                std::vector<TensorPtr<T>>& params, std::vector<std::string>& names) {
    const auto push = [&](const TensorPtr<T>& t, const std::string& n) {
        params.push_back(t);
        names.push_back(prefix + n);
    };
    if (blk.kind == MixerKind::Cmlp) {
        push(blk.w1, "w1");
        push(blk.b1, "b1");
        push(blk.w2, "w2");
        push(blk.b2, "b2");
    } else {
        push(blk.re_w1, "re.w1");
        push(blk.re_b1, "re.b1");
        push(blk.re_w2, "re.w2");
        push(blk.re_b2, "re.b2");
        push(blk.im_w1, "im.w1");
        push(blk.im_b1, "im.b1");
        push(blk.im_w2, "im.w2");
        push(blk.im_b2, "im.b2");
    }
}

template <typename T>
void collect(const Model<T>& m, std::vector<TensorPtr<T>>& params, std::vector<std::string>& names) {
    const auto push = [&](const TensorPtr<T>& t, const std::string& n) {
        params.push_back(t);
        names.push_back(n);
    };
    if (m.desc.variant == ModelVariant::PureMlpBaseline) {
        for (std::size_t i = 0; i < m.mlp.size(); ++i) {
            push(m.mlp[i].w, "mlp." + std::to_string(i) + ".weight");
            push(m.mlp[i].b, "mlp." + std::to_string(i) + ".bias");
        }
        return;
    }
    push(m.embed_ant.w, "embed_ant.weight");
    push(m.embed_ant.b, "embed_ant.bias");
    push(m.embed_sub.w, "embed_sub.weight");
    push(m.embed_sub.b, "embed_sub.bias");
    for (std::size_t k = 0; k < m.layers.size(); ++k) {
        const std::string base = "layers." + std::to_string(k) + ".";
        push(m.layers[k].ln_space_gain, base + "ln_space.gain");
        push(m.layers[k].ln_space_bias, base + "ln_space.bias");
        push_block(m.layers[k].sm, base + "sm.", params, names);
        push(m.layers[k].ln_freq_gain, base + "ln_freq.gain");
        push(m.layers[k].ln_freq_bias, base + "ln_freq.bias");
        push_block(m.layers[k].fm, base + "fm.", params, names);
    }
    push(m.head_ant.w, "head_ant.weight");
    push(m.head_ant.b, "head_ant.bias");
    push(m.head_sub.w, "head_sub.weight");
    push(m.head_sub.b, "head_sub.bias");
}

}  // namespace detail

template <typename T>
std::vector<TensorPtr<T>> Model<T>::parameters() const {
    std::vector<TensorPtr<T>> params;
    std::vector<std::string> names;
    detail::collect(*this, params, names);
    return params;
}

template <typename T>
std::vector<std::string> Model<T>::parameter_names() const {
    std::vector<TensorPtr<T>> params;
    std::vector<std::string> names;
    detail::collect(*this, params, names);
    return names;
}

template <typename T>
std::int64_t count_params(const Model<T>& model) {
    std::int64_t n = 0;
    for (const auto& p : model.parameters()) n += p->numel();
    return n;
}

}  // namespace cmixer::net
