#include "platoonsim/obs/metrics.hpp"

#include <cmath>
#include <limits>

#include "platoonsim/common/errors.hpp"

namespace psim {

EpisodeMetrics platoon_metrics(const EpisodeTrace& trace) {
    if (trace.ticks.empty() || trace.vehicle_count == 0) {
        throw ContractViolation("platoon_metrics: empty trace");
    }
    const int n = trace.vehicle_count;

    EpisodeMetrics m;
    m.collisions = trace.collisions;

    // Final engagement status and first engagement time per CAV.
    std::vector<int> final_engaged(n, 0);
    std::vector<double> first_engaged(n, -1.0);
    int max_chain = 0;
    for (const auto& tick : trace.ticks) {
        max_chain = std::max(max_chain, tick.max_chain);
        for (int id = 0; id < n; ++id) {
            if (tick.present[id]) final_engaged[id] = tick.engaged[id];
            if (tick.engaged[id] && first_engaged[id] < 0.0) {
                first_engaged[id] = tick.time;
            }
        }
    }
    m.max_platoon_length = max_chain;

    int cav_count = 0, engaged_count = 0;
    double formation_sum = 0.0;
    for (int id = 0; id < n; ++id) {
        if (trace.kinds[id] != VehicleKind::CAV) continue;
        ++cav_count;
        if (final_engaged[id]) {
            ++engaged_count;
            formation_sum += first_engaged[id];
        }
    }
    m.platoon_rate = cav_count > 0
                         ? static_cast<double>(engaged_count) / cav_count
                         : 0.0;
    m.formation_time = engaged_count > 0
                           ? formation_sum / engaged_count
                           : std::numeric_limits<double>::quiet_NaN();

    long lc_total = 0;
    double energy_sum = 0.0;
    for (int id = 0; id < n; ++id) {
        lc_total += trace.lane_changes[id];
        energy_sum += trace.abs_accel_integral[id];
    }
    m.lane_changes_per_vehicle = static_cast<double>(lc_total) / n;
    m.energy = energy_sum / n;
    m.mean_speed = trace.speed_samples > 0
                       ? trace.speed_sum / static_cast<double>(trace.speed_samples)
                       : 0.0;
    return m;
}

}  // namespace psim
