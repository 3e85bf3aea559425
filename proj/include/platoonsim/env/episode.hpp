#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "platoonsim/decision/greedy.hpp"
#include "platoonsim/decision/mobil.hpp"
#include "platoonsim/exec/lane_change.hpp"
#include "platoonsim/obs/grid.hpp"
#include "platoonsim/obs/metrics.hpp"
#include "platoonsim/obs/reward.hpp"
#include "platoonsim/rl/qmix.hpp"
#include "platoonsim/sim/world.hpp"

namespace psim {

enum class PolicyKind { Mobil, Greedy, GreedyRlc, CnnQmix, FlatQmix };

PolicyKind policy_from_string(const std::string& name);
std::string policy_name(PolicyKind kind);

// Everything an episode needs besides the policy: scenario geometry plus all
// controller/decision/reward parameter sets.
struct EnvConfig {
    ScenarioConfig scenario;
    IdmParams idm;
    AccParams acc;    // radar-only gap control (longer headway)
    AccParams cacc;   // connected gap control (shorter headway + feed-forward)
    double sensing_range = 100.0;  // [m]
    EngagementRule engagement;
    MobilParams mobil;
    GreedyParams greedy;
    RewardConfig reward;
    GridConfig grid;
    ManeuverConfig maneuver;
    double decision_period = 1.0;       // [s] between decision ticks
    double horizon = 180.0;             // [s] episode cap
    double rlc_reference_lc = 0.0;      // fleet lane-change budget reference

    AccelModels accel_models() const {
        return AccelModels{idm, acc, cacc, sensing_range};
    }
};

// Builds EnvConfig defaults consistent with the scenario road (grid lanes,
// engagement rule from the CACC headway).
EnvConfig make_env_config(const ScenarioConfig& scenario);

struct EpisodeOptions {
    PolicyKind policy = PolicyKind::Mobil;
    std::uint64_t seed = 0;
    double mpr = 0.5;
    double epsilon = 0.0;               // RL exploration
    bool collect_transitions = false;   // record replay data
    rl::QmixModel* model = nullptr;     // learned policies
    const WorldState* initial_world = nullptr;  // override scenario build
};

struct EpisodeOutcome {
    EpisodeMetrics metrics;
    EpisodeTrace trace;
    rl::EpisodeRecord record;
    double mean_team_reward = 0.0;
    bool collided = false;
    double duration = 0.0;  // [s]
};

// Runs one seeded episode to completion (all exited, collision, or horizon).
EpisodeOutcome run_episode(const EnvConfig& env, const EpisodeOptions& opts);

// Fixed-width observation for the flat (fixed-agent-count) QMIX baseline:
// ego block [v/v_max, lane one-hot, x/segment] then per agent slot
// [present, dx/r_range, v/v_max, lane one-hot].
std::vector<double> flat_observation(const WorldState& world, int ego_id,
                                     const std::vector<int>& slot_vehicle,
                                     const EnvConfig& env);
int flat_observation_dim(int fixed_n, int lane_count);

}  // namespace psim
