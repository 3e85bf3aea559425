#include "platoonsim/exec/lane_change.hpp"

#include <algorithm>
#include <cmath>

#include "platoonsim/common/errors.hpp"

namespace psim {

namespace {

PlanStart start_from(const VehicleState& ego) {
    return PlanStart{ego.x, ego.y, ego.v, ego.a, ego.theta};
}

}  // namespace

ManeuverTracker::ManeuverTracker(const WorldState& world, const VehicleState& ego,
                                 int target_lane, const ManeuverConfig& cfg) {
    origin_lane_ = ego.lane;
    target_lane_ = target_lane;
    const PlanStart start = start_from(ego);
    const PlanGoal goal{world.road.lane_center(target_lane), ego.v};
    const double t_f = select_tf(start, goal, cfg.weights, cfg.tf_candidates);
    plan_ = plan_quintic(start, goal, t_f);
}

Eigen::Vector2d ManeuverTracker::reference_at(double t) const {
    if (t <= plan_.t_f) {
        return {plan_.x(t), plan_.y(t)};
    }
    const double overrun = t - plan_.t_f;
    return {plan_.x(plan_.t_f) + plan_.x_dot(plan_.t_f) * overrun,
            plan_.y(plan_.t_f)};
}

ControlInput ManeuverTracker::control(const WorldState& world,
                                      const VehicleState& ego,
                                      const ManeuverConfig& cfg) {
    if (elapsed_ >= plan_.t_f + 1e-9) {
        throw ContractViolation("ManeuverTracker::control: plan expired");
    }
    std::vector<Eigen::Vector2d> reference(cfg.mpc.horizon);
    for (int k = 0; k < cfg.mpc.horizon; ++k) {
        reference[k] = reference_at(elapsed_ + (k + 1) * cfg.mpc.dt);
    }
    const double v0 = std::max(ego.v, cfg.min_linearization_speed);
    const LinearBicycle model =
        linearize_bicycle(v0, world.bicycle.tau, world.bicycle.l_r, cfg.mpc.dt);

    Eigen::Matrix<double, 5, 1> state;
    state << ego.x, ego.y, ego.theta, ego.v, ego.a;
    const MpcSolution sol = mpc_step(state, reference, model, cfg.mpc, u_prev_);
    u_prev_ = sol.u;
    return sol.u;
}

bool ManeuverTracker::check_abort(const WorldState& world,
                                  const VehicleState& ego,
                                  const ManeuverConfig& cfg) {
    if (aborted_) return false;
    const double lateral_gate = 0.5 * world.road.lane_width;
    const int steps = static_cast<int>(cfg.abort_horizon / world.road.dt + 0.5);
    for (const auto& other : world.vehicles) {
        if (other.id == ego.id || other.exited) continue;
        if (other.lane != origin_lane_ && other.lane != target_lane_) continue;
        for (int k = 1; k <= steps; ++k) {
            const double t_ahead = k * world.road.dt;
            const Eigen::Vector2d ego_pred = reference_at(elapsed_ + t_ahead);
            const double other_x = other.x + other.v * t_ahead;
            const bool longitudinal =
                std::abs(ego_pred.x() - other_x) < 0.5 * (ego.length + other.length);
            const bool lateral = std::abs(ego_pred.y() - other.y) < lateral_gate;
            if (longitudinal && lateral) {
                // Re-plan back toward the origin lane from the current state.
                const PlanStart start = start_from(ego);
                const PlanGoal goal{world.road.lane_center(origin_lane_), ego.v};
                plan_ = plan_quintic(start, goal, cfg.abort_replan_tf);
                elapsed_ = 0.0;
                target_lane_ = origin_lane_;
                aborted_ = true;
                return true;
            }
        }
    }
    return false;
}

}  // namespace psim
