#pragma once

#include <cstdint>
#include <vector>

#include "platoonsim/nk/params.hpp"

namespace psim::rl {

// State-conditioned monotone mixing network: two-layer mixer whose weights
// come from single linear hypernetworks of the global state, with the
// absolute-value transform enforcing nonnegative mixing weights. Masked
// agents contribute exactly zero.
struct MixerConfig {
    int n_max = 24;
    int state_dim = 0;
    int hidden = 32;
};

nk::ParamLayout build_mixer_layout(const MixerConfig& cfg);

struct MixerCache {
    std::vector<double> state;
    std::vector<std::uint8_t> mask; // n_max
    std::vector<double> q_masked;   // n_max
    std::vector<double> w1_raw;     // hidden * n_max (pre-abs)
    std::vector<double> b1;         // hidden
    std::vector<double> hidden_pre; // hidden
    std::vector<double> hidden_out; // hidden (ELU)
    std::vector<double> w2_raw;     // hidden (pre-abs)
};

// qs has n_max entries; masked slots are ignored (multiplied by zero).
double mixer_forward(const MixerConfig& cfg, const nk::ParamLayout& layout,
                     const nk::ParamVector& params, const double* qs,
                     const std::uint8_t* mask, const double* state,
                     MixerCache* cache);

// g_qtotal is dL/dQ_total; parameter grads accumulate into `grads`,
// per-agent grads into gqs (masked slots receive zero contribution).
void mixer_backward(const MixerConfig& cfg, const nk::ParamLayout& layout,
                    const nk::ParamVector& params, const MixerCache& cache,
                    double g_qtotal, nk::ParamVector& grads, double* gqs);

}  // namespace psim::rl
