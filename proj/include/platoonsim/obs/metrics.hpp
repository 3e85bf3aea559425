#pragma once

#include <cstdint>
#include <vector>

#include "platoonsim/sim/types.hpp"

namespace psim {

struct EpisodeMetrics {
    double platoon_rate = 0.0;        // CAVs engaged at episode end / CAV count
    double max_platoon_length = 0.0;  // largest CACC chain observed (vehicles)
    double formation_time = 0.0;      // mean first-engagement time [s]; NaN if none
    double lane_changes_per_vehicle = 0.0;
    double mean_speed = 0.0;          // time-and-fleet average [m/s]
    double energy = 0.0;              // fleet mean of integral |a| dt [m/s]
    int collisions = 0;
};

// One decision-tick snapshot of platooning state.
struct TickRecord {
    double time = 0.0;
    std::vector<std::uint8_t> present;  // per vehicle: active on segment
    std::vector<std::uint8_t> engaged;  // per vehicle: CACC-engaged
    int max_chain = 0;                  // largest chain this tick
};

// Episode record accumulated by the engine; platoon_metrics reduces it.
struct EpisodeTrace {
    int vehicle_count = 0;
    std::vector<VehicleKind> kinds;
    double dt = 0.1;
    long speed_samples = 0;
    double speed_sum = 0.0;
    std::vector<double> abs_accel_integral;  // per vehicle [m/s]
    std::vector<int> lane_changes;           // per vehicle
    std::vector<TickRecord> ticks;
    int collisions = 0;
    double duration = 0.0;  // [s]
};

// Reduces a complete episode trace to metrics. Throws on an empty trace.
// A CAV counts as platooning by its engagement status in the last tick where
// it was present (vehicles that exit keep their at-exit status).
EpisodeMetrics platoon_metrics(const EpisodeTrace& trace);

}  // namespace psim
