#pragma once

#include <map>
#include <utility>
#include <vector>

#include "platoonsim/sim/types.hpp"

namespace psim {

struct WorldState {
    RoadConfig road;
    BicycleParams bicycle;
    double desired_speed_hv = 15.4;   // [m/s]
    double desired_speed_cav = 15.4;  // [m/s]
    double time = 0.0;                // [s]
    std::vector<VehicleState> vehicles;  // indexed by id

    const VehicleState& vehicle(int id) const { return vehicles.at(id); }
    VehicleState& vehicle(int id) { return vehicles.at(id); }

    double desired_speed(VehicleKind k) const {
        return k == VehicleKind::CAV ? desired_speed_cav : desired_speed_hv;
    }

    int active_count() const {
        int n = 0;
        for (const auto& v : vehicles)
            if (!v.exited) ++n;
        return n;
    }
};

// Seeded scenario generation: vehicle_count vehicles rejection-sampled into
// [spawn_min, spawn_max] with bumper-to-bumper spacing >= min_spawn_gap,
// exactly round(mpr * vehicle_count) CAVs. Throws ConfigError when the range
// cannot host all vehicles at minimum spacing.
WorldState build_scenario(const ScenarioConfig& cfg);

// Advances every active vehicle one step with integrate_bicycle, re-derives
// lane indices from y, marks vehicles past segment_length exited, and
// advances the clock. Every active vehicle must have a control.
WorldState step_world(const WorldState& world,
                      const std::map<int, ControlInput>& controls, double dt);

// Nearest predecessor/follower around ego's longitudinal position in
// target_lane. Gaps are bumper-to-bumper. delta_v is the closing rate:
// ego.v - pred.v for the predecessor, follower.v - ego.v for the follower.
// A vehicle longitudinally level with the ego (bumper overlap) counts as a
// predecessor if its center is ahead.
Neighborhood neighbors(const WorldState& world, int ego_id, int target_lane);

// Unordered vehicle pairs whose longitudinal bumper intervals overlap while
// their lateral offset is below lane_width / 2 (rear-end and side-swipe).
std::vector<std::pair<int, int>> detect_collisions(const WorldState& world);

}  // namespace psim
