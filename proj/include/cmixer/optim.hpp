#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "cmixer/tensor.hpp"

namespace cmixer::ad {

/// Step-wise decayed learning rate: base_lr until warm_period epochs have
/// passed, then multiplied by decay_factor once per period. Epochs count
/// from 1; the first decayed rate takes effect at epoch warm_period + 1.
struct LrSchedule {
    double base_lr = 1e-3;
    double decay_factor = 0.2;
    int period = 500;
    int warm_period = 500;
};

inline double lr_at(int epoch, const LrSchedule& schedule) {
    if (epoch < 1) throw std::invalid_argument("lr_at: epoch must be >= 1");
    if (schedule.period < 1 || schedule.warm_period < 0) {
        throw std::invalid_argument("lr_at: invalid schedule periods");
    }
    const int past_warm = epoch - schedule.warm_period;
    if (past_warm <= 0) return schedule.base_lr;
    const int decays = (past_warm + schedule.period - 1) / schedule.period;  // ceil
    return schedule.base_lr * std::pow(schedule.decay_factor, decays);
}

/// Adam moment accumulators, one pair per parameter tensor.
template <typename T>
struct AdamState {
    T beta1 = T(0.9);
    T beta2 = T(0.999);
    T eps = T(1e-8);
    long step = 0;
    std::vector<std::vector<T>> m;
    std::vector<std::vector<T>> v;

    explicit AdamState(const std::vector<TensorPtr<T>>& params) {
        m.reserve(params.size());
        v.reserve(params.size());
        for (const auto& p : params) {
            m.emplace_back(p->value.size(), T(0));
            v.emplace_back(p->value.size(), T(0));
        }
    }
};

/// Standard Adam update with bias correction, reading param->grad.
template <typename T>
void adam_step(const std::vector<TensorPtr<T>>& params, AdamState<T>& state, T lr) {
    if (params.size() != state.m.size()) {
        throw std::invalid_argument("adam_step: state does not match parameter list");
    }
    state.step += 1;
    const T bc1 = T(1) - std::pow(state.beta1, T(state.step));
    const T bc2 = T(1) - std::pow(state.beta2, T(state.step));
    for (std::size_t k = 0; k < params.size(); ++k) {
        Tensor<T>& p = *params[k];
        p.ensure_grad();
        if (state.m[k].size() != p.value.size()) {
            throw std::invalid_argument("adam_step: moment shape does not match parameter");
        }
        std::vector<T>& m = state.m[k];
        std::vector<T>& v = state.v[k];
        for (std::size_t i = 0; i < p.value.size(); ++i) {
            const T g = p.grad[i];
            m[i] = state.beta1 * m[i] + (T(1) - state.beta1) * g;
            v[i] = state.beta2 * v[i] + (T(1) - state.beta2) * g * g;
            const T mhat = m[i] / bc1;
            const T vhat = v[i] / bc2;
            p.value[i] -= lr * mhat / (std::sqrt(vhat) + state.eps);
        }
    }
}

}  // namespace cmixer::ad
