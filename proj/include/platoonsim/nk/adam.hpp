#pragma once

#include "platoonsim/nk/params.hpp"

namespace psim::nk {

// Adaptive moment estimation with bias-corrected first/second moments.
struct AdamState {
    double lr = 1.0e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1.0e-8;
    long step_count = 0;
    ParamVector m;  // first moments
    ParamVector v;  // second moments

    explicit AdamState(std::size_t size, double learning_rate = 1.0e-4)
        : lr(learning_rate), m(size, 0.0), v(size, 0.0) {}
};

// In-place update; throws TrainingError on non-finite gradients.
void optimizer_step(ParamVector& params, const ParamVector& grads,
                    AdamState& state);

}  // namespace psim::nk
