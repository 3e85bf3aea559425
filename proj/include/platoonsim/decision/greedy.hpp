#pragma once

#include <map>
#include <vector>

#include "platoonsim/common/random.hpp"
#include "platoonsim/decision/mobil.hpp"
#include "platoonsim/obs/platoon.hpp"

namespace psim {

struct GreedyParams {
    double alpha = 0.5;      // weight between speed and position deviation
    double m_dev = 0.2;      // max allowed desired-speed deviation fraction
    double r_range = 100.0;  // search range [m] (V2V sensing range)
    double rlc_prob = 0.05;  // extra random-lane-change probability per step
};

// A platoon (or lone CAV) a searching vehicle may join, approached at the tail.
struct PlatoonTarget {
    int tail_id = 0;
    double leader_pos = 0.0;    // p_t [m]
    double tail_pos = 0.0;      // l_t [m]
    double desired_speed = 0.0; // D_t [m/s]
    int lane = 0;
};

struct CandidateVehicle {
    int id = 0;
    double pos = 0.0;           // p_c [m]
    double desired_speed = 0.0; // D_c [m/s]
    int lane = 0;
};

// Vehicle-to-platoon assignment: one chosen target per candidate (the
// one-hot row of the binary decision matrix), -1 for self-assignment.
struct Assignment {
    std::vector<int> target_index;  // per candidate; -1 = drive individually
};

// f = alpha * d_s + (1-alpha) * d_p with
//   d_s = |D_c - D_t| / (m * D_c),  d_p = min(|p_c - p_t|, |l_t - p_c|) / r.
double greedy_similarity(const CandidateVehicle& c, const PlatoonTarget& t,
                         const GreedyParams& p);

// Each candidate takes the feasible target minimizing f (d_s <= 1 and
// d_p <= 1 required); infeasible everywhere -> self-assignment. Candidates
// are processed front to back by position, ties by id. A target whose tail
// is the candidate itself is never considered.
Assignment greedy_assign(const std::vector<CandidateVehicle>& candidates,
                         const std::vector<PlatoonTarget>& targets,
                         const GreedyParams& p);

// Full greedy decision: unplatooned CAVs are candidates, CACC chains are
// targets; an assignment becomes at most one MOBIL-safe lateral step toward
// the target's lane. Same-lane assignments approach longitudinally (0).
std::map<int, int> greedy_decide(const WorldState& world, const GreedyParams& p,
                                 const EngagementRule& rule,
                                 const MobilParams& mobil,
                                 const AccelModels& models);

// Greedy plus budgeted random lane changes for idle CAVs: while budget
// remains, an idle CAV proposes a random direction with probability
// rlc_prob; MOBIL-unsafe proposals are suppressed with the budget unspent.
// Decrements `budget` per extra change. With budget 0 this is bitwise
// identical to greedy_decide.
std::map<int, int> greedy_rlc_decide(const WorldState& world,
                                     const GreedyParams& p,
                                     const EngagementRule& rule,
                                     const MobilParams& mobil,
                                     const AccelModels& models, int& budget,
                                     RandomStream& rng);

}  // namespace psim
