#pragma once

#include <vector>

#include "platoonsim/nk/layers.hpp"
#include "platoonsim/nk/params.hpp"

namespace psim::rl {

// Per-agent recurrent Q-network. The conv encoder (grid input) gives one
// parameter set that serves any agent count; the flat encoder is the
// fixed-count baseline whose input width bakes in the configured agent
// count.
enum class EncoderKind { Conv, Flat };

struct AgentNetConfig {
    EncoderKind encoder = EncoderKind::Conv;
    // Conv encoder input (channels x lanes x cells).
    int grid_channels = 3;
    int grid_lanes = 3;
    int grid_cells = 20;
    // Flat encoder input width; only meaningful for EncoderKind::Flat.
    int flat_dim = 0;
    int flat_enc_units = 128;  // width of the FC layer replacing the convs
    int fixed_n = 0;  // agent count the flat variant was built for

    int n_max = 24;   // agent-id one-hot length / mask slots
    int actions = 3;
    int fc1_units = 128;
    int gru_hidden = 64;
    int fc2_units = 64;

    nk::Conv2dSpec conv1() const {
        return {grid_channels, grid_lanes, grid_cells, 16, 3, 3, 2, 2, true};
    }
    nk::Conv2dSpec conv2() const {
        const auto c1 = conv1();
        return {c1.filters, c1.out_h(), c1.out_w(), 32, 3, 3, 2, 2, true};
    }
    nk::Conv2dSpec conv3() const {
        const auto c2 = conv2();
        return {c2.filters, c2.out_h(), c2.out_w(), 16, 2, 2, 1, 2, true};
    }
    int encoded_dim() const {
        if (encoder == EncoderKind::Flat) return flat_enc_units;
        const auto c3 = conv3();
        return c3.filters * c3.out_h() * c3.out_w();
    }
    int obs_dim() const {
        return encoder == EncoderKind::Flat
                   ? flat_dim
                   : grid_channels * grid_lanes * grid_cells;
    }
    int trunk_in() const { return encoded_dim() + actions + n_max; }
};

nk::ParamLayout build_agent_layout(const AgentNetConfig& cfg);

// Intermediate activations of one forward pass, consumed by the backward.
struct AgentCache {
    std::vector<double> obs;  // copy of the raw observation
    std::vector<double> conv1_pre, conv1_out;
    std::vector<double> conv2_pre, conv2_out;
    std::vector<double> conv3_pre, conv3_out;
    std::vector<double> flat_pre, flat_out;  // flat encoder path
    std::vector<double> trunk_in;            // encoded + one-hots
    std::vector<double> fc1_pre, fc1_out;
    std::vector<double> h_prev;
    nk::GruCache gru;
    std::vector<double> h_next;
    std::vector<double> fc2_pre, fc2_out;
    std::vector<double> head_pre;
};

// q gets `actions` values; h_next gets gru_hidden values. last_action uses
// the {-1,0,1} encoding. Throws AgentCountMismatch when a flat-encoder net
// sees an observation of the wrong width.
void agent_forward(const AgentNetConfig& cfg, const nk::ParamLayout& layout,
                   const nk::ParamVector& params, const double* obs,
                   std::size_t obs_len, int last_action, int agent_slot,
                   const double* h_prev, double* q, double* h_next,
                   AgentCache* cache);

// Accumulates parameter gradients from dL/dq (and optionally dL/dh_next).
// gh_prev, when non-null, receives the gradient into the incoming hidden
// state (used by the BPTT checks); training treats stored hidden states as
// constants.
void agent_backward(const AgentNetConfig& cfg, const nk::ParamLayout& layout,
                    const nk::ParamVector& params, const AgentCache& cache,
                    const double* gq, const double* gh_next,
                    nk::ParamVector& grads, double* gh_prev = nullptr);

}  // namespace psim::rl
