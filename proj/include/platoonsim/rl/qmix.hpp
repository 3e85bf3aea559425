#pragma once

#include <functional>
#include <string>
#include <vector>

#include "platoonsim/common/parallel.hpp"
#include "platoonsim/nk/adam.hpp"
#include "platoonsim/rl/agent_net.hpp"
#include "platoonsim/rl/mixer.hpp"
#include "platoonsim/rl/replay.hpp"

namespace psim::rl {

inline int action_index(int action) { return action + 1; }  // {-1,0,1} -> {0,1,2}
inline int index_action(int index) { return index - 1; }

// Weight-shared agent network + monotone mixer, with hard-copied target
// parameters.
struct QmixModel {
    AgentNetConfig agent_cfg;
    MixerConfig mixer_cfg;
    nk::ParamLayout agent_layout;
    nk::ParamLayout mixer_layout;
    nk::ParamVector agent_params, mixer_params;
    nk::ParamVector agent_target, mixer_target;

    static QmixModel create(const AgentNetConfig& acfg, const MixerConfig& mcfg,
                            std::uint64_t seed);
    void update_target();  // hard copy, idempotent
};

struct AgentDecisionInput {
    const double* obs = nullptr;
    std::size_t obs_len = 0;
    int last_action = 0;
    int agent_slot = 0;
    const double* h_prev = nullptr;
};

// Epsilon-greedy joint action selection; hidden states are advanced for every
// agent. h_next[i] receives gru_hidden values; q_values (optional) the raw
// per-agent Q-vectors.
std::vector<int> select_actions(const QmixModel& model,
                                const std::vector<AgentDecisionInput>& inputs,
                                double epsilon, RandomStream& rng,
                                std::vector<std::vector<double>>& h_next,
                                std::vector<std::vector<double>>* q_values = nullptr);

// TD loss over a batch: mean (r + gamma * max_a' Q_total^target - Q_total)^2
// with the bootstrap dropped on terminal transitions and the target joint
// action taken per-agent (decentralized argmax under monotone mixing).
// Gradients (d loss / d params) accumulate into grad_agent / grad_mixer,
// which must be zero-initialized layouts-sized vectors. Per-sample gradients
// are reduced in fixed sample order regardless of the execution policy, so
// serial and parallel results are bit-identical.
double td_loss(const QmixModel& model,
               const std::vector<ReplayBuffer::Sample>& batch, double gamma,
               nk::ParamVector& grad_agent, nk::ParamVector& grad_mixer,
               const ExecPolicy& exec = ExecPolicy::omp());

struct TrainConfig {
    int episodes = 2000;
    double gamma = 0.5;
    double eps_start = 1.0;
    double eps_end = 0.05;
    double eps_decay_frac = 0.6;   // fraction of episodes to reach eps_end
    int target_update_period = 200;  // training steps between hard copies
    int checkpoint_period = 200;     // episodes
    int batch_size = 128;
    int replay_capacity = 5000;      // episodes
    double learning_rate = 1.0e-4;
    int train_steps_per_episode = 1;
    int best_window = 10;            // moving-average window for "best" reward
    std::uint64_t seed = 0;
    std::vector<double> mpr_list{0.5};
    std::string out_dir;             // checkpoint directory ("" = no files)
    bool parallel = true;
};

struct RolloutRequest {
    int episode = 0;
    double epsilon = 0.0;
    std::uint64_t seed = 0;
    double mpr = 0.5;
};

struct RolloutResult {
    EpisodeRecord record;
    double mean_reward = 0.0;
    double platoon_rate = 0.0;
    bool collided = false;
};

using RolloutFn = std::function<RolloutResult(const RolloutRequest&)>;

struct TrainLogRow {
    int episode = 0;
    double epsilon = 0.0;
    double mean_reward = 0.0;
    double platoon_rate = 0.0;
    double loss = 0.0;  // NaN before the first update
};

struct TrainResult {
    std::vector<TrainLogRow> log;
    std::string best_checkpoint;
    std::string final_checkpoint;
    double best_window_reward = 0.0;
    long train_steps = 0;
};

// Rollout -> replay -> TD update loop with periodic and best-reward
// checkpoints. Throws TrainingError if the loss diverges.
TrainResult train(QmixModel& model, const TrainConfig& cfg,
                  const RolloutFn& rollout);

double epsilon_at(const TrainConfig& cfg, int episode);

// Checkpoint round-trip (bit-exact parameters).
void save_qmix_checkpoint(const std::string& path, const QmixModel& model);
QmixModel load_qmix_checkpoint(const std::string& path);

}  // namespace psim::rl
