#include "platoonsim/obs/reward.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace psim {

double reward_safety(std::optional<double> gap_front,
                     std::optional<double> gap_rear, const RewardConfig& cfg) {
    double min_dev = std::numeric_limits<double>::infinity();
    if (gap_front) min_dev = std::min(min_dev, std::abs(*gap_front - cfg.h_min));
    if (gap_rear) min_dev = std::min(min_dev, std::abs(*gap_rear - cfg.h_min));
    if (std::isinf(min_dev)) return 1.0;  // no neighbors, no safety pressure
    return std::exp(-cfg.r_decay * min_dev);
}

double reward_speed(double v_p, double v, const RewardConfig& cfg) {
    return std::exp(-cfg.m_decay * std::abs(v_p - v));
}

double reward_platoon(int n_ahead) {
    if (n_ahead <= 0) return 0.0;
    return std::max(0.0, std::log10(2.0 * n_ahead));
}

double combined_reward(double r_c, double r_v, double r_d, bool collided,
                       const RewardConfig& cfg) {
    if (collided) return cfg.collision_penalty;
    return cfg.w1 * r_c + cfg.w2 * r_v + cfg.w3 * r_d;
}

double agent_reward(const WorldState& world, int ego_id, bool collided,
                    const RewardConfig& cfg, const EngagementRule& rule) {
    if (collided) return cfg.collision_penalty;
    const VehicleState& ego = world.vehicle(ego_id);
    const Neighborhood nb = neighbors(world, ego_id, ego.lane);
    std::optional<double> gap_front, gap_rear;
    if (nb.predecessor) gap_front = nb.predecessor->gap;
    if (nb.follower) gap_rear = nb.follower->gap;
    const double r_d = reward_safety(gap_front, gap_rear, cfg);
    const double v_p = nb.predecessor ? world.vehicle(nb.predecessor->id).v
                                      : world.desired_speed(ego.kind);
    const double r_v = reward_speed(v_p, ego.v, cfg);
    const double r_c = reward_platoon(count_connected_ahead(world, ego_id, rule));
    return combined_reward(r_c, r_v, r_d, false, cfg);
}

}  // namespace psim
