#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "platoonsim/common/parallel.hpp"
#include "platoonsim/env/episode.hpp"

namespace psim {

struct ExperimentSpec {
    std::vector<PolicyKind> policies;
    std::vector<double> mprs;
    std::vector<std::uint64_t> seeds;
    EnvConfig env;
    std::string checkpoint;  // required when a learned policy is listed
    bool parallel = true;
};

struct EpisodeRow {
    PolicyKind policy;
    double mpr = 0.0;
    std::uint64_t seed = 0;
    EpisodeMetrics metrics;
    double mean_reward = 0.0;
};

struct AggregateRow {
    PolicyKind policy;
    double mpr = 0.0;
    int seed_count = 0;
    double platoon_rate_mean = 0.0, platoon_rate_std = 0.0;
    double max_length_mean = 0.0, max_length_std = 0.0;
    double formation_time_mean = 0.0, formation_time_std = 0.0;
    int formation_n = 0;  // episodes with a defined formation time
    double lane_changes_mean = 0.0, lane_changes_std = 0.0;
    double mean_speed_mean = 0.0, mean_speed_std = 0.0;
    double energy_mean = 0.0, energy_std = 0.0;
    double collision_rate = 0.0;  // fraction of episodes with a collision
};

struct ResultsTable {
    std::vector<EpisodeRow> episodes;      // one row per (policy, mpr, seed)
    std::vector<AggregateRow> aggregates;  // one row per (policy, mpr)
};

// Runs the sweep; episodes execute in parallel into preallocated slots and
// aggregation is a fixed-order single pass, so output is bit-identical
// across thread counts and reruns.
ResultsTable run_experiment(const ExperimentSpec& spec);

// Aggregates recomputed from episode rows (used by run_experiment and by the
// audit check).
std::vector<AggregateRow> aggregate_rows(const std::vector<EpisodeRow>& rows);

std::string episodes_csv(const ResultsTable& table);
std::string aggregates_csv(const ResultsTable& table);
std::string results_json(const ResultsTable& table);
void write_results(const ResultsTable& table, const std::string& out_dir);

// Per-MPR policy ordering by mean platoon rate with bootstrap confidence
// intervals (percentile method).
struct PolicyInterval {
    PolicyKind policy;
    double mean = 0.0;
    double lo = 0.0;   // 2.5th percentile of the bootstrap means
    double hi = 0.0;   // 97.5th percentile
};

struct MprOrdering {
    double mpr = 0.0;
    std::vector<PolicyInterval> ranked;  // descending mean platoon rate
    bool paper_ordering_holds = false;   // cnn_qmix > greedy_rlc >= greedy > mobil
};

struct OrderingReport {
    std::vector<MprOrdering> per_mpr;
};

OrderingReport compare_policies(const ResultsTable& table, int resamples = 10000,
                                std::uint64_t seed = 12345);
std::string ordering_json(const OrderingReport& report);

}  // namespace psim
