#pragma once

#include <cstdint>
#include <deque>
#include <vector>

#include "platoonsim/common/random.hpp"

namespace psim::rl {

// One decision tick of an episode. Transition t is (ticks[t] -> ticks[t+1]);
// the stored hidden states are the rollout values (replayed from the episode
// start under the behavior parameters) and are treated as constants by the
// TD backward pass.
struct TickData {
    std::vector<std::vector<double>> obs;  // per agent slot; empty if absent
    std::vector<double> global_state;
    std::vector<double> h_prev;        // n_max * gru_hidden, pre-selection
    std::vector<int> last_actions;     // n_max, {-1,0,1}
    std::vector<int> actions;          // n_max, {-1,0,1}
    std::vector<std::uint8_t> mask;    // n_max presence flags
    double reward = 0.0;               // team reward earned by this tick
    bool terminal = false;
};

struct EpisodeRecord {
    std::vector<TickData> ticks;
};

// FIFO of episodes, capacity counted in episodes; uniform sampling over all
// stored transitions, without replacement within one call.
class ReplayBuffer {
public:
    ReplayBuffer(int capacity_episodes, std::uint64_t seed)
        : capacity_(capacity_episodes), rng_(seed) {}

    void add(EpisodeRecord episode);

    std::size_t episode_count() const { return episodes_.size(); }
    std::size_t total_transitions() const { return total_; }

    struct Sample {
        const TickData* cur;
        const TickData* next;  // nullptr for terminal transitions
    };

    // batch distinct transitions; requires total_transitions() >= batch.
    std::vector<Sample> sample(int batch);

private:
    int capacity_;
    RandomStream rng_;
    std::deque<EpisodeRecord> episodes_;
    std::size_t total_ = 0;

    Sample locate(std::size_t flat_index) const;
};

}  // namespace psim::rl
