#pragma once

#include <optional>

#include "platoonsim/control/longitudinal.hpp"
#include "platoonsim/obs/platoon.hpp"
#include "platoonsim/sim/world.hpp"

namespace psim {

struct RewardConfig {
    double w1 = 1.0;    // platooning weight
    double w2 = 0.5;    // speed weight
    double w3 = 2.0;    // safety weight
    double r_decay = 0.1;   // safety exponential decay [1/m]
    double m_decay = 0.2;   // speed exponential decay [s/m]
    double h_min = 6.0;     // minimum safe distance [m]
    double collision_penalty = -5.0;
};

// r_d = exp(-r * min(|gap_front - h_min|, |gap_rear - h_min|)); an absent
// neighbor's term is excluded, and with no neighbors at all r_d = 1.
double reward_safety(std::optional<double> gap_front,
                     std::optional<double> gap_rear, const RewardConfig& cfg);

// r_v = exp(-m * |v_p - v|); with no predecessor v_p falls back to the
// configured desired speed.
double reward_speed(double v_p, double v, const RewardConfig& cfg);

// r_c = max(0, log10(2n)) for n >= 1, 0 for n = 0.
double reward_platoon(int n_ahead);

// w1*r_c + w2*r_v + w3*r_d without a collision; exactly -5 with one.
double combined_reward(double r_c, double r_v, double r_d, bool collided,
                       const RewardConfig& cfg);

// Full per-agent reward from the current world.
double agent_reward(const WorldState& world, int ego_id, bool collided,
                    const RewardConfig& cfg, const EngagementRule& rule);

}  // namespace psim
