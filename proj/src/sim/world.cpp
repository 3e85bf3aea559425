#include "platoonsim/sim/world.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "platoonsim/common/errors.hpp"
#include "platoonsim/common/random.hpp"
#include "platoonsim/sim/bicycle.hpp"

namespace psim {

WorldState build_scenario(const ScenarioConfig& cfg) {
    if (cfg.road.lane_count < 2) throw ConfigError("lane_count must be >= 2");
    if (!(cfg.road.segment_length > 0.0)) throw ConfigError("segment_length must be > 0");
    if (!(cfg.road.dt > 0.0)) throw ConfigError("dt must be > 0");
    if (cfg.mpr < 0.0 || cfg.mpr > 1.0) throw ConfigError("mpr must be in [0,1]");
    if (cfg.spawn_min < 0.0 || cfg.spawn_max > cfg.road.segment_length ||
        cfg.spawn_min >= cfg.spawn_max) {
        throw ConfigError("spawn range must lie within the segment");
    }

    // Capacity check: each lane hosts at most floor((span + gap)/(len + gap)).
    const double span = cfg.spawn_max - cfg.spawn_min;
    const int per_lane = static_cast<int>(
        (span + cfg.min_spawn_gap) / (cfg.vehicle_length + cfg.min_spawn_gap));
    if (per_lane * cfg.road.lane_count < cfg.vehicle_count) {
        throw ConfigError("spawn range too small for " +
                          std::to_string(cfg.vehicle_count) +
                          " vehicles at minimum spacing");
    }

    RandomStream rng(cfg.seed);

    // CAV assignment by seeded shuffle of vehicle ids.
    std::vector<int> ids(cfg.vehicle_count);
    for (int i = 0; i < cfg.vehicle_count; ++i) ids[i] = i;
    rng.shuffle(ids);
    std::vector<bool> is_cav(cfg.vehicle_count, false);
    for (int i = 0; i < cfg.cav_count(); ++i) is_cav[ids[i]] = true;

    WorldState world;
    world.road = cfg.road;
    world.bicycle = cfg.bicycle;
    world.desired_speed_hv = cfg.desired_speed_hv;
    world.desired_speed_cav = cfg.desired_speed_cav;
    world.vehicles.reserve(cfg.vehicle_count);

    for (int id = 0; id < cfg.vehicle_count; ++id) {
        VehicleState s;
        s.id = id;
        s.kind = is_cav[id] ? VehicleKind::CAV : VehicleKind::HumanDriven;
        s.length = cfg.vehicle_length;
        s.v = is_cav[id] ? cfg.desired_speed_cav : cfg.desired_speed_hv;

        bool placed = false;
        for (int attempt = 0; attempt < 10000 && !placed; ++attempt) {
            const int lane = rng.next_int(0, cfg.road.lane_count - 1);
            const double x = rng.next_double(cfg.spawn_min, cfg.spawn_max);
            bool ok = true;
            for (const auto& other : world.vehicles) {
                if (other.lane != lane) continue;
                const double gap = std::abs(x - other.x) -
                                   0.5 * (s.length + other.length);
                if (gap < cfg.min_spawn_gap) {
                    ok = false;
                    break;
                }
            }
            if (ok) {
                s.lane = lane;
                s.x = x;
                s.y = cfg.road.lane_center(lane);
                placed = true;
            }
        }
        if (!placed) {
            throw ConfigError("rejection sampling failed to place vehicle " +
                              std::to_string(id));
        }
        world.vehicles.push_back(s);
    }
    return world;
}

WorldState step_world(const WorldState& world,
                      const std::map<int, ControlInput>& controls, double dt) {
    WorldState next = world;
    for (auto& veh : next.vehicles) {
        if (veh.exited) continue;
        auto it = controls.find(veh.id);
        if (it == controls.end()) {
            throw ContractViolation("step_world: missing control for vehicle " +
                                    std::to_string(veh.id));
        }
        veh = integrate_bicycle(veh, it->second, next.bicycle, dt);
        veh.lane = next.road.lane_of(veh.y);
        if (veh.x > next.road.segment_length) veh.exited = true;
    }
    next.time = world.time + dt;
    return next;
}

Neighborhood neighbors(const WorldState& world, int ego_id, int target_lane) {
    const VehicleState& ego = world.vehicle(ego_id);
    Neighborhood out;
    double best_ahead = std::numeric_limits<double>::infinity();
    double best_behind = std::numeric_limits<double>::infinity();
    for (const auto& other : world.vehicles) {
        if (other.id == ego_id || other.exited) continue;
        if (other.lane != target_lane) continue;
        const double dx = other.x - ego.x;
        if (dx >= 0.0) {
            if (dx < best_ahead) {
                best_ahead = dx;
                out.predecessor = NeighborInfo{
                    other.id,
                    std::max(0.0, other.rear_bumper() - ego.front_bumper()),
                    ego.v - other.v};
            }
        } else {
            if (-dx < best_behind) {
                best_behind = -dx;
                out.follower = NeighborInfo{
                    other.id,
                    std::max(0.0, ego.rear_bumper() - other.front_bumper()),
                    other.v - ego.v};
            }
        }
    }
    return out;
}

std::vector<std::pair<int, int>> detect_collisions(const WorldState& world) {
    std::vector<std::pair<int, int>> pairs;
    const double lateral_gate = 0.5 * world.road.lane_width;
    const auto& vs = world.vehicles;
    for (std::size_t i = 0; i < vs.size(); ++i) {
        if (vs[i].exited) continue;
        for (std::size_t j = i + 1; j < vs.size(); ++j) {
            if (vs[j].exited) continue;
            const bool longitudinal =
                vs[i].rear_bumper() < vs[j].front_bumper() &&
                vs[j].rear_bumper() < vs[i].front_bumper();
            const bool lateral = std::abs(vs[i].y - vs[j].y) < lateral_gate;
            if (longitudinal && lateral) {
                pairs.emplace_back(vs[i].id, vs[j].id);
            }
        }
    }
    return pairs;
}

}  // namespace psim
