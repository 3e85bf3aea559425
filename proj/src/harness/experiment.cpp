#include "platoonsim/harness/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>

#include <json.hpp>

#include "platoonsim/common/errors.hpp"
#include "platoonsim/common/random.hpp"

namespace psim {

namespace {

bool is_learned(PolicyKind p) {
    return p == PolicyKind::CnnQmix || p == PolicyKind::FlatQmix;
}

double mean_of(const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

double std_of(const std::vector<double>& v, double mean) {
    if (v.size() < 2) return 0.0;
    double s = 0.0;
    for (double x : v) s += (x - mean) * (x - mean);
    return std::sqrt(s / static_cast<double>(v.size() - 1));
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

}  // namespace

std::vector<AggregateRow> aggregate_rows(const std::vector<EpisodeRow>& rows) {
    // Group by (policy, mpr) preserving first-appearance order.
    std::vector<std::pair<PolicyKind, double>> keys;
    for (const auto& r : rows) {
        const std::pair<PolicyKind, double> key{r.policy, r.mpr};
        if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
            keys.push_back(key);
        }
    }
    std::vector<AggregateRow> out;
    for (const auto& [policy, mpr] : keys) {
        std::vector<double> rate, maxlen, formation, lc, speed, energy;
        int collisions = 0, count = 0;
        for (const auto& r : rows) {
            if (r.policy != policy || r.mpr != mpr) continue;
            ++count;
            rate.push_back(r.metrics.platoon_rate);
            maxlen.push_back(r.metrics.max_platoon_length);
            if (std::isfinite(r.metrics.formation_time)) {
                formation.push_back(r.metrics.formation_time);
            }
            lc.push_back(r.metrics.lane_changes_per_vehicle);
            speed.push_back(r.metrics.mean_speed);
            energy.push_back(r.metrics.energy);
            if (r.metrics.collisions > 0) ++collisions;
        }
        AggregateRow a;
        a.policy = policy;
        a.mpr = mpr;
        a.seed_count = count;
        a.platoon_rate_mean = mean_of(rate);
        a.platoon_rate_std = std_of(rate, a.platoon_rate_mean);
        a.max_length_mean = mean_of(maxlen);
        a.max_length_std = std_of(maxlen, a.max_length_mean);
        a.formation_time_mean =
            formation.empty() ? std::numeric_limits<double>::quiet_NaN()
                              : mean_of(formation);
        a.formation_time_std =
            formation.empty() ? 0.0 : std_of(formation, a.formation_time_mean);
        a.formation_n = static_cast<int>(formation.size());
        a.lane_changes_mean = mean_of(lc);
        a.lane_changes_std = std_of(lc, a.lane_changes_mean);
        a.mean_speed_mean = mean_of(speed);
        a.mean_speed_std = std_of(speed, a.mean_speed_mean);
        a.energy_mean = mean_of(energy);
        a.energy_std = std_of(energy, a.energy_mean);
        a.collision_rate =
            count > 0 ? static_cast<double>(collisions) / count : 0.0;
        out.push_back(a);
    }
    return out;
}

ResultsTable run_experiment(const ExperimentSpec& spec) {
    if (spec.seeds.empty()) throw ConfigError("experiment needs at least one seed");
    if (spec.policies.empty()) throw ConfigError("experiment needs a policy");

    rl::QmixModel model;
    bool model_loaded = false;
    for (PolicyKind p : spec.policies) {
        if (is_learned(p)) {
            if (spec.checkpoint.empty()) {
                throw ConfigError("learned policy requires a checkpoint");
            }
            model = rl::load_qmix_checkpoint(spec.checkpoint);
            model_loaded = true;
            break;
        }
    }

    struct Job {
        PolicyKind policy;
        double mpr;
        std::uint64_t seed;
    };
    std::vector<Job> jobs;
    for (PolicyKind p : spec.policies) {
        for (double mpr : spec.mprs) {
            for (std::uint64_t seed : spec.seeds) {
                jobs.push_back({p, mpr, seed});
            }
        }
    }

    ResultsTable table;
    table.episodes.resize(jobs.size());
    const ExecPolicy exec =
        spec.parallel ? ExecPolicy::omp() : ExecPolicy::serial();
    parallel_for(exec, jobs.size(), [&](std::size_t i) {
        const Job& job = jobs[i];
        EpisodeOptions opts;
        opts.policy = job.policy;
        opts.seed = job.seed;
        opts.mpr = job.mpr;
        opts.model = model_loaded ? &model : nullptr;
        const EpisodeOutcome outcome = run_episode(spec.env, opts);
        EpisodeRow row;
        row.policy = job.policy;
        row.mpr = job.mpr;
        row.seed = job.seed;
        row.metrics = outcome.metrics;
        row.mean_reward = outcome.mean_team_reward;
        table.episodes[i] = row;
    });
    table.aggregates = aggregate_rows(table.episodes);
    return table;
}

std::string episodes_csv(const ResultsTable& table) {
    std::string out = "# schema=platoonsim-episodes-v1\n";
    out += "policy,mpr,seed,platoon_rate,max_platoon_length,formation_time,"
           "lane_changes_per_vehicle,mean_speed,energy,collisions,mean_reward\n";
    for (const auto& r : table.episodes) {
        out += policy_name(r.policy) + "," + fmt(r.mpr) + "," +
               std::to_string(r.seed) + "," + fmt(r.metrics.platoon_rate) + "," +
               fmt(r.metrics.max_platoon_length) + "," +
               fmt(r.metrics.formation_time) + "," +
               fmt(r.metrics.lane_changes_per_vehicle) + "," +
               fmt(r.metrics.mean_speed) + "," + fmt(r.metrics.energy) + "," +
               std::to_string(r.metrics.collisions) + "," + fmt(r.mean_reward) +
               "\n";
    }
    return out;
}

std::string aggregates_csv(const ResultsTable& table) {
    std::string out = "# schema=platoonsim-aggregates-v1\n";
    out += "policy,mpr,seeds,platoon_rate_mean,platoon_rate_std,"
           "max_platoon_length_mean,max_platoon_length_std,"
           "formation_time_mean,formation_time_std,formation_n,"
           "lane_changes_mean,lane_changes_std,mean_speed_mean,mean_speed_std,"
           "energy_mean,energy_std,collision_rate\n";
    for (const auto& a : table.aggregates) {
        out += policy_name(a.policy) + "," + fmt(a.mpr) + "," +
               std::to_string(a.seed_count) + "," + fmt(a.platoon_rate_mean) +
               "," + fmt(a.platoon_rate_std) + "," + fmt(a.max_length_mean) +
               "," + fmt(a.max_length_std) + "," + fmt(a.formation_time_mean) +
               "," + fmt(a.formation_time_std) + "," +
               std::to_string(a.formation_n) + "," + fmt(a.lane_changes_mean) +
               "," + fmt(a.lane_changes_std) + "," + fmt(a.mean_speed_mean) +
               "," + fmt(a.mean_speed_std) + "," + fmt(a.energy_mean) + "," +
               fmt(a.energy_std) + "," + fmt(a.collision_rate) + "\n";
    }
    return out;
}

std::string results_json(const ResultsTable& table) {
    nlohmann::json j;
    j["schema"] = "platoonsim-results-v1";
    j["episodes"] = nlohmann::json::array();
    for (const auto& r : table.episodes) {
        nlohmann::json e;
        e["policy"] = policy_name(r.policy);
        e["mpr"] = r.mpr;
        e["seed"] = r.seed;
        e["platoon_rate"] = r.metrics.platoon_rate;
        e["max_platoon_length"] = r.metrics.max_platoon_length;
        e["formation_time"] = std::isfinite(r.metrics.formation_time)
                                  ? nlohmann::json(r.metrics.formation_time)
                                  : nlohmann::json(nullptr);
        e["lane_changes_per_vehicle"] = r.metrics.lane_changes_per_vehicle;
        e["mean_speed"] = r.metrics.mean_speed;
        e["energy"] = r.metrics.energy;
        e["collisions"] = r.metrics.collisions;
        e["mean_reward"] = r.mean_reward;
        j["episodes"].push_back(e);
    }
    j["aggregates"] = nlohmann::json::array();
    for (const auto& a : table.aggregates) {
        nlohmann::json e;
        e["policy"] = policy_name(a.policy);
        e["mpr"] = a.mpr;
        e["seeds"] = a.seed_count;
        e["platoon_rate_mean"] = a.platoon_rate_mean;
        e["platoon_rate_std"] = a.platoon_rate_std;
        j["aggregates"].push_back(e);
    }
    return j.dump(2);
}

void write_results(const ResultsTable& table, const std::string& out_dir) {
    std::filesystem::create_directories(out_dir);
    std::ofstream(out_dir + "/episodes.csv") << episodes_csv(table);
    std::ofstream(out_dir + "/aggregates.csv") << aggregates_csv(table);
    std::ofstream(out_dir + "/results.json") << results_json(table);
}

OrderingReport compare_policies(const ResultsTable& table, int resamples,
                                std::uint64_t seed) {
    // Collect platoon rates per (policy, mpr).
    std::map<double, std::map<PolicyKind, std::vector<double>>> grid;
    for (const auto& r : table.episodes) {
        grid[r.mpr][r.policy].push_back(r.metrics.platoon_rate);
    }
    // Shared grid check: every policy must appear at every mpr with the same
    // number of seeds.
    std::size_t expect = 0;
    for (const auto& [mpr, by_policy] : grid) {
        for (const auto& [policy, rates] : by_policy) {
            if (expect == 0) expect = rates.size();
            if (rates.size() != expect) {
                throw ConfigError("compare_policies: mismatched mpr/seed grids");
            }
        }
    }

    OrderingReport report;
    RandomStream rng(seed);
    for (const auto& [mpr, by_policy] : grid) {
        MprOrdering ordering;
        ordering.mpr = mpr;
        for (const auto& [policy, rates] : by_policy) {
            PolicyInterval pi;
            pi.policy = policy;
            pi.mean = mean_of(rates);
            std::vector<double> boot(resamples);
            for (int b = 0; b < resamples; ++b) {
                double s = 0.0;
                for (std::size_t k = 0; k < rates.size(); ++k) {
                    s += rates[rng.next_index(rates.size())];
                }
                boot[b] = s / static_cast<double>(rates.size());
            }
            std::sort(boot.begin(), boot.end());
            const auto pick = [&](double q) {
                const double idx = q * (resamples - 1);
                return boot[static_cast<std::size_t>(idx + 0.5)];
            };
            pi.lo = pick(0.025);
            pi.hi = pick(0.975);
            ordering.ranked.push_back(pi);
        }
        std::sort(ordering.ranked.begin(), ordering.ranked.end(),
                  [](const PolicyInterval& a, const PolicyInterval& b) {
                      if (a.mean != b.mean) return a.mean > b.mean;
                      return static_cast<int>(a.policy) < static_cast<int>(b.policy);
                  });

        // Paper ordering over whichever of the four policies are present.
        auto mean_or_nan = [&](PolicyKind p) {
            for (const auto& pi : ordering.ranked) {
                if (pi.policy == p) return pi.mean;
            }
            return std::numeric_limits<double>::quiet_NaN();
        };
        const double m_cnn = mean_or_nan(PolicyKind::CnnQmix);
        const double m_rlc = mean_or_nan(PolicyKind::GreedyRlc);
        const double m_greedy = mean_or_nan(PolicyKind::Greedy);
        const double m_mobil = mean_or_nan(PolicyKind::Mobil);
        bool holds = true;
        if (!std::isnan(m_cnn) && !std::isnan(m_rlc)) holds &= m_cnn > m_rlc;
        if (!std::isnan(m_cnn) && std::isnan(m_rlc) && !std::isnan(m_greedy))
            holds &= m_cnn > m_greedy;
        if (!std::isnan(m_rlc) && !std::isnan(m_greedy)) holds &= m_rlc >= m_greedy;
        if (!std::isnan(m_greedy) && !std::isnan(m_mobil)) holds &= m_greedy > m_mobil;
        if (!std::isnan(m_cnn) && !std::isnan(m_mobil)) holds &= m_cnn > m_mobil;
        ordering.paper_ordering_holds = holds;
        report.per_mpr.push_back(ordering);
    }
    return report;
}

std::string ordering_json(const OrderingReport& report) {
    nlohmann::json j;
    j["schema"] = "platoonsim-ordering-v1";
    j["per_mpr"] = nlohmann::json::array();
    for (const auto& o : report.per_mpr) {
        nlohmann::json e;
        e["mpr"] = o.mpr;
        e["paper_ordering_holds"] = o.paper_ordering_holds;
        e["ranked"] = nlohmann::json::array();
        for (const auto& pi : o.ranked) {
            nlohmann::json p;
            p["policy"] = policy_name(pi.policy);
            p["mean_platoon_rate"] = pi.mean;
            p["ci95"] = {pi.lo, pi.hi};
            e["ranked"].push_back(p);
        }
        j["per_mpr"].push_back(e);
    }
    return j.dump(2);
}

}  // namespace psim
