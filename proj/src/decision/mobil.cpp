#include "platoonsim/decision/mobil.hpp"

#include <cmath>

namespace psim {

namespace {
constexpr double kHardBrake = -1.0e9;  // sentinel for impossible insertions
}

double predict_accel(const WorldState& world, const VehicleState& follower,
                     const VehicleState* pred, const AccelModels& models) {
    if (pred == nullptr) {
        if (follower.is_cav()) {
            return free_flow_command(follower.v,
                                     world.desired_speed(follower.kind), models.acc);
        }
        return idm_accel(follower.v, kFreeFlowGap, 0.0, models.idm);
    }
    const double gap = pred->rear_bumper() - follower.front_bumper();
    if (gap <= 0.0) return kHardBrake;
    if (gap > models.sensing_range) {
        return predict_accel(world, follower, nullptr, models);
    }
    if (follower.is_cav()) {
        const AccParams& p = pred->is_cav() ? models.cacc : models.acc;
        return acc_command(gap, follower.v, pred->v, p);
    }
    return idm_accel(follower.v, gap, follower.v - pred->v, models.idm);
}

MobilContext build_mobil_context(const WorldState& world, int ego_id, LcDir dir,
                                 const AccelModels& models) {
    const VehicleState& ego = world.vehicle(ego_id);
    const int target_lane = ego.lane + static_cast<int>(dir);

    const Neighborhood cur = neighbors(world, ego_id, ego.lane);
    const Neighborhood tgt = neighbors(world, ego_id, target_lane);

    const VehicleState* cur_pred =
        cur.predecessor ? &world.vehicle(cur.predecessor->id) : nullptr;
    const VehicleState* new_pred =
        tgt.predecessor ? &world.vehicle(tgt.predecessor->id) : nullptr;

    MobilContext ctx;
    ctx.time_since_last_lc = world.time - ego.last_lc_time;
    ctx.insertion_gaps_positive =
        (!tgt.predecessor || tgt.predecessor->gap > 0.0) &&
        (!tgt.follower || tgt.follower->gap > 0.0);

    ctx.ego_now = predict_accel(world, ego, cur_pred, models);
    ctx.ego_after = predict_accel(world, ego, new_pred, models);

    if (cur.follower) {
        const VehicleState& old_follower = world.vehicle(cur.follower->id);
        ctx.has_old_follower = true;
        ctx.old_follower_now = predict_accel(world, old_follower, &ego, models);
        ctx.old_follower_after = predict_accel(world, old_follower, cur_pred, models);
    }
    if (tgt.follower) {
        const VehicleState& new_follower = world.vehicle(tgt.follower->id);
        ctx.has_new_follower = true;
        ctx.new_follower_now = predict_accel(world, new_follower, new_pred, models);
        ctx.new_follower_after = predict_accel(world, new_follower, &ego, models);
    }
    return ctx;
}

bool mobil_safety(const MobilContext& ctx, const MobilParams& p) {
    if (!(ctx.time_since_last_lc > p.delta_t_l)) return false;
    if (!ctx.insertion_gaps_positive) return false;
    if (ctx.has_new_follower && !(ctx.new_follower_after > -p.b_s)) return false;
    return true;
}

std::pair<bool, double> mobil_incentive(const MobilContext& ctx, LcDir dir,
                                        const MobilParams& p) {
    double incentive = ctx.ego_after - ctx.ego_now;
    if (ctx.has_old_follower) {
        incentive += p.politeness * (ctx.old_follower_after - ctx.old_follower_now);
    }
    if (ctx.has_new_follower) {
        incentive += p.politeness * (ctx.new_follower_after - ctx.new_follower_now);
    }
    const bool feasible = incentive > p.delta_a_t;
    const double utility = incentive + (dir == LcDir::Right ? p.a_b : 0.0);
    return {feasible, utility};
}

int mobil_decide(const WorldState& world, int ego_id, const MobilParams& p,
                 const AccelModels& models) {
    const VehicleState& ego = world.vehicle(ego_id);
    int best_action = 0;
    double best_utility = 0.0;  // keeping the lane
    // Right first so that equal utilities resolve keep > right > left.
    for (const LcDir dir : {LcDir::Right, LcDir::Left}) {
        const int target = ego.lane + static_cast<int>(dir);
        if (target < 0 || target >= world.road.lane_count) continue;
        const MobilContext ctx = build_mobil_context(world, ego_id, dir, models);
        if (!mobil_safety(ctx, p)) continue;
        const auto [feasible, utility] = mobil_incentive(ctx, dir, p);
        if (feasible && utility > best_utility) {
            best_utility = utility;
            best_action = static_cast<int>(dir);
        }
    }
    return best_action;
}

}  // namespace psim
