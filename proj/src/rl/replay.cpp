#include "platoonsim/rl/replay.hpp"

#include <set>

#include "platoonsim/common/errors.hpp"

namespace psim::rl {

void ReplayBuffer::add(EpisodeRecord episode) {
    if (episode.ticks.empty()) return;
    total_ += episode.ticks.size();
    episodes_.push_back(std::move(episode));
    while (static_cast<int>(episodes_.size()) > capacity_) {
        total_ -= episodes_.front().ticks.size();
        episodes_.pop_front();
    }
}

ReplayBuffer::Sample ReplayBuffer::locate(std::size_t flat_index) const {
    for (const auto& ep : episodes_) {
        if (flat_index < ep.ticks.size()) {
            const TickData* cur = &ep.ticks[flat_index];
            const TickData* next = flat_index + 1 < ep.ticks.size()
                                       ? &ep.ticks[flat_index + 1]
                                       : nullptr;
            return {cur, next};
        }
        flat_index -= ep.ticks.size();
    }
    throw ContractViolation("ReplayBuffer::locate: index out of range");
}

std::vector<ReplayBuffer::Sample> ReplayBuffer::sample(int batch) {
    if (static_cast<std::size_t>(batch) > total_) {
        throw ContractViolation("ReplayBuffer::sample: batch exceeds stored transitions");
    }
    // Floyd's algorithm: `batch` distinct indices in [0, total), uniform.
    std::set<std::size_t> chosen;
    for (std::size_t j = total_ - batch; j < total_; ++j) {
        const std::size_t t = rng_.next_index(j + 1);
        if (!chosen.insert(t).second) chosen.insert(j);
    }
    std::vector<Sample> out;
    out.reserve(batch);
    for (std::size_t idx : chosen) out.push_back(locate(idx));
    return out;
}

}  // namespace psim::rl
