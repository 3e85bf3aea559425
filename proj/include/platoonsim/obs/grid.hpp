#pragma once

#include <vector>

#include "platoonsim/sim/world.hpp"

namespace psim {

struct GridConfig {
    double l_tail = 100.0;  // perception range behind ego [m]
    double l_head = 100.0;  // perception range ahead of ego [m]
    double l_grid = 10.0;   // cell width [m]
    int channels = 3;       // position-in-cell, speed, type
    int lanes = 3;
    double v_max = 30.0;    // speed normalization [m/s]

    int cells() const { return static_cast<int>((l_tail + l_head) / l_grid + 0.5); }
};

// k x n x m tensor, row-major (channel, lane, cell), cells rear -> front.
// Channel 0: relative longitudinal position within the cell in [0,1).
// Channel 1: speed / v_max. Channel 2: type code {0 empty, 1 human, 2 CAV}.
struct GridObservation {
    int channels = 0;
    int lanes = 0;
    int cells = 0;
    std::vector<double> data;

    double& at(int c, int lane, int cell) {
        return data[(c * lanes + lane) * cells + cell];
    }
    double at(int c, int lane, int cell) const {
        return data[(c * lanes + lane) * cells + cell];
    }
};

// Ego-centered grid over [x_ego - l_tail, x_ego + l_head); the vehicle
// nearest the ego wins a shared cell; out-of-range vehicles are omitted.
GridObservation encode_grid(const WorldState& world, int ego_id,
                            const GridConfig& cfg);

// Whole-segment grid (global state for the mixing network): same channels,
// cells over [0, segment_length), nearer-to-cell-center vehicle wins ties.
GridObservation encode_global_state(const WorldState& world, const GridConfig& cfg);

}  // namespace psim
