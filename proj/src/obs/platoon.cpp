#include "platoonsim/obs/platoon.hpp"

#include <algorithm>

namespace psim {

namespace {

// Active vehicles in one lane ordered rear to front.
std::vector<const VehicleState*> lane_order(const WorldState& world, int lane) {
    std::vector<const VehicleState*> out;
    for (const auto& v : world.vehicles) {
        if (!v.exited && v.lane == lane) out.push_back(&v);
    }
    std::sort(out.begin(), out.end(), [](const VehicleState* a, const VehicleState* b) {
        if (a->x != b->x) return a->x < b->x;
        return a->id < b->id;
    });
    return out;
}

bool link_engaged(const VehicleState& follower, const VehicleState& pred,
                  const EngagementRule& rule) {
    if (!follower.is_cav() || !pred.is_cav()) return false;
    const double gap = pred.rear_bumper() - follower.front_bumper();
    return gap >= 0.0 && gap <= rule.max_gap(follower.v);
}

}  // namespace

bool cacc_engaged(const WorldState& world, int ego_id, const EngagementRule& rule) {
    const VehicleState& ego = world.vehicle(ego_id);
    if (ego.exited || !ego.is_cav()) return false;
    const Neighborhood nb = neighbors(world, ego_id, ego.lane);
    if (!nb.predecessor) return false;
    return link_engaged(ego, world.vehicle(nb.predecessor->id), rule);
}

int count_connected_ahead(const WorldState& world, int ego_id,
                          const EngagementRule& rule) {
    int count = 0;
    int current = ego_id;
    while (true) {
        const VehicleState& cur = world.vehicle(current);
        const Neighborhood nb = neighbors(world, current, cur.lane);
        if (!nb.predecessor) break;
        const VehicleState& pred = world.vehicle(nb.predecessor->id);
        // The walk itself must be CAV-behind-CAV; the ego may be the only
        // non-engaged element when it has a human predecessor.
        if (!pred.is_cav() || !cur.is_cav()) break;
        const double gap = nb.predecessor->gap;
        if (gap > rule.max_gap(cur.v)) break;
        ++count;
        current = pred.id;
    }
    return count;
}

std::vector<std::vector<int>> platoon_chains(const WorldState& world,
                                             const EngagementRule& rule) {
    std::vector<std::vector<int>> chains;
    for (int lane = 0; lane < world.road.lane_count; ++lane) {
        const auto order = lane_order(world, lane);
        std::vector<int> chain;  // rear to front while building
        for (std::size_t i = 0; i < order.size(); ++i) {
            const VehicleState* v = order[i];
            if (!v->is_cav()) {
                if (!chain.empty()) {
                    std::reverse(chain.begin(), chain.end());
                    chains.push_back(chain);
                    chain.clear();
                }
                continue;
            }
            if (chain.empty()) {
                chain.push_back(v->id);
            } else {
                // chain.back() is the frontmost vehicle so far; it is the
                // follower of the next vehicle v ahead of it.
                const VehicleState& prev = world.vehicle(chain.back());
                if (link_engaged(prev, *v, rule)) {
                    chain.push_back(v->id);
                } else {
                    std::reverse(chain.begin(), chain.end());
                    chains.push_back(chain);
                    chain = {v->id};
                }
            }
        }
        if (!chain.empty()) {
            std::reverse(chain.begin(), chain.end());
            chains.push_back(chain);
        }
    }
    return chains;
}

}  // namespace psim
