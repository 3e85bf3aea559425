#include "platoonsim/nk/adam.hpp"

#include <cmath>

#include "platoonsim/common/errors.hpp"

namespace psim::nk {

void optimizer_step(ParamVector& params, const ParamVector& grads,
                    AdamState& state) {
    if (params.size() != grads.size() || params.size() != state.m.size()) {
        throw ContractViolation("optimizer_step: size mismatch");
    }
    ++state.step_count;
    const double bc1 = 1.0 - std::pow(state.beta1, state.step_count);
    const double bc2 = 1.0 - std::pow(state.beta2, state.step_count);
    for (std::size_t i = 0; i < params.size(); ++i) {
        const double g = grads[i];
        if (!std::isfinite(g)) {
            throw TrainingError("optimizer_step: non-finite gradient");
        }
        state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * g;
        state.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * g * g;
        const double m_hat = state.m[i] / bc1;
        const double v_hat = state.v[i] / bc2;
        params[i] -= state.lr * m_hat / (std::sqrt(v_hat) + state.eps);
    }
}

}  // namespace psim::nk
