#include "platoonsim/decision/greedy.hpp"

#include <algorithm>
#include <cmath>

namespace psim {

double greedy_similarity(const CandidateVehicle& c, const PlatoonTarget& t,
                         const GreedyParams& p) {
    const double d_s = std::abs(c.desired_speed - t.desired_speed) /
                       (p.m_dev * c.desired_speed);
    const double d_p =
        std::min(std::abs(c.pos - t.leader_pos), std::abs(t.tail_pos - c.pos)) /
        p.r_range;
    return p.alpha * d_s + (1.0 - p.alpha) * d_p;
}

Assignment greedy_assign(const std::vector<CandidateVehicle>& candidates,
                         const std::vector<PlatoonTarget>& targets,
                         const GreedyParams& p) {
    // Front-to-back processing order, ties by id.
    std::vector<std::size_t> order(candidates.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (candidates[a].pos != candidates[b].pos)
            return candidates[a].pos > candidates[b].pos;
        return candidates[a].id < candidates[b].id;
    });

    Assignment out;
    out.target_index.assign(candidates.size(), -1);
    for (const std::size_t ci : order) {
        const CandidateVehicle& c = candidates[ci];
        double best_f = std::numeric_limits<double>::infinity();
        int best_t = -1;
        for (std::size_t ti = 0; ti < targets.size(); ++ti) {
            const PlatoonTarget& t = targets[ti];
            if (t.tail_id == c.id) continue;  // self handled as -1
            const double d_s = std::abs(c.desired_speed - t.desired_speed) /
                               (p.m_dev * c.desired_speed);
            const double d_p = std::min(std::abs(c.pos - t.leader_pos),
                                        std::abs(t.tail_pos - c.pos)) /
                               p.r_range;
            if (d_s > 1.0 || d_p > 1.0) continue;  // outside the m/r envelopes
            const double f = p.alpha * d_s + (1.0 - p.alpha) * d_p;
            if (f < best_f) {
                best_f = f;
                best_t = static_cast<int>(ti);
            }
        }
        out.target_index[ci] = best_t;
    }
    return out;
}

namespace {

// One lateral step toward the target lane, gated by MOBIL safety.
int step_toward_lane(const WorldState& world, int ego_id, int target_lane,
                     const MobilParams& mobil, const AccelModels& models) {
    const VehicleState& ego = world.vehicle(ego_id);
    if (target_lane == ego.lane) return 0;
    const LcDir dir = target_lane > ego.lane ? LcDir::Left : LcDir::Right;
    const int next_lane = ego.lane + static_cast<int>(dir);
    if (next_lane < 0 || next_lane >= world.road.lane_count) return 0;
    const MobilContext ctx = build_mobil_context(world, ego_id, dir, models);
    return mobil_safety(ctx, mobil) ? static_cast<int>(dir) : 0;
}

struct GreedyProblem {
    std::vector<CandidateVehicle> candidates;
    std::vector<PlatoonTarget> targets;
};

GreedyProblem build_problem(const WorldState& world, const EngagementRule& rule) {
    GreedyProblem prob;
    const auto chains = platoon_chains(world, rule);
    std::vector<bool> platooned(world.vehicles.size(), false);
    for (const auto& chain : chains) {
        const VehicleState& leader = world.vehicle(chain.front());
        const VehicleState& tail = world.vehicle(chain.back());
        prob.targets.push_back(PlatoonTarget{
            tail.id, leader.x, tail.x,
            world.desired_speed(VehicleKind::CAV), tail.lane});
        if (chain.size() > 1) {
            for (int id : chain) platooned[id] = true;
        }
    }
    for (const auto& v : world.vehicles) {
        if (v.exited || !v.is_cav()) continue;
        if (platooned[v.id]) continue;              // already cooperating
        if (v.lc_phase == LcPhase::Executing) continue;
        prob.candidates.push_back(CandidateVehicle{
            v.id, v.x, world.desired_speed(v.kind), v.lane});
    }
    return prob;
}

}  // namespace

std::map<int, int> greedy_decide(const WorldState& world, const GreedyParams& p,
                                 const EngagementRule& rule,
                                 const MobilParams& mobil,
                                 const AccelModels& models) {
    std::map<int, int> actions;
    for (const auto& v : world.vehicles) {
        if (!v.exited && v.is_cav()) actions[v.id] = 0;
    }
    const GreedyProblem prob = build_problem(world, rule);
    const Assignment assignment = greedy_assign(prob.candidates, prob.targets, p);
    for (std::size_t ci = 0; ci < prob.candidates.size(); ++ci) {
        const int ti = assignment.target_index[ci];
        if (ti < 0) continue;  // drive individually
        actions[prob.candidates[ci].id] =
            step_toward_lane(world, prob.candidates[ci].id,
                             prob.targets[ti].lane, mobil, models);
    }
    return actions;
}

std::map<int, int> greedy_rlc_decide(const WorldState& world,
                                     const GreedyParams& p,
                                     const EngagementRule& rule,
                                     const MobilParams& mobil,
                                     const AccelModels& models, int& budget,
                                     RandomStream& rng) {
    std::map<int, int> actions = greedy_decide(world, p, rule, mobil, models);
    for (auto& [id, action] : actions) {
        if (budget <= 0) break;
        if (action != 0) continue;
        const VehicleState& ego = world.vehicle(id);
        if (ego.lc_phase == LcPhase::Executing) continue;
        if (cacc_engaged(world, id, rule)) continue;  // not idle
        if (rng.next_double() >= p.rlc_prob) continue;
        // Random direction among valid lanes.
        std::vector<LcDir> dirs;
        if (ego.lane + 1 < world.road.lane_count) dirs.push_back(LcDir::Left);
        if (ego.lane - 1 >= 0) dirs.push_back(LcDir::Right);
        if (dirs.empty()) continue;
        const LcDir dir = dirs[rng.next_index(dirs.size())];
        const MobilContext ctx = build_mobil_context(world, id, dir, models);
        if (!mobil_safety(ctx, mobil)) continue;  // suppressed, budget unspent
        action = static_cast<int>(dir);
        --budget;
    }
    return actions;
}

}  // namespace psim
