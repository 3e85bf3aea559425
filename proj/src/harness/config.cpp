#include "platoonsim/harness/config.hpp"

#include <fstream>

#include <json.hpp>

#include "platoonsim/common/errors.hpp"

namespace psim {

using nlohmann::json;

namespace {

template <typename T>
void maybe(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

FileConfig default_config() {
    FileConfig cfg;
    cfg.env = make_env_config(ScenarioConfig{});
    return cfg;
}

FileConfig load_config(const std::string& path) {
    FileConfig cfg = default_config();
    if (path.empty()) return cfg;
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open config file: " + path);
    json j;
    try {
        is >> j;
    } catch (const json::exception& e) {
        throw ConfigError("config parse error in " + path + ": " + e.what());
    }

    ScenarioConfig& sc = cfg.env.scenario;
    maybe(j, "lane_count", sc.road.lane_count);
    maybe(j, "segment_length", sc.road.segment_length);
    maybe(j, "lane_width", sc.road.lane_width);
    maybe(j, "dt", sc.road.dt);
    maybe(j, "vehicle_count", sc.vehicle_count);
    maybe(j, "mpr", sc.mpr);
    maybe(j, "spawn_min", sc.spawn_min);
    maybe(j, "spawn_max", sc.spawn_max);
    maybe(j, "seed", sc.seed);
    maybe(j, "desired_speed_hv", sc.desired_speed_hv);
    maybe(j, "desired_speed_cav", sc.desired_speed_cav);
    maybe(j, "min_spawn_gap", sc.min_spawn_gap);
    maybe(j, "vehicle_length", sc.vehicle_length);
    maybe(j, "tau", sc.bicycle.tau);
    maybe(j, "l_f", sc.bicycle.l_f);
    maybe(j, "l_r", sc.bicycle.l_r);

    // Controller parameter sets.
    maybe(j, "idm_a0", cfg.env.idm.a0);
    maybe(j, "idm_b0", cfg.env.idm.b0);
    maybe(j, "idm_T", cfg.env.idm.T);
    maybe(j, "idm_v0", cfg.env.idm.v0);
    maybe(j, "idm_s0", cfg.env.idm.s0);
    maybe(j, "idm_delta", cfg.env.idm.delta);
    maybe(j, "k_p", cfg.env.acc.k_p);
    maybe(j, "k_d", cfg.env.acc.k_d);
    maybe(j, "acc_t_hw", cfg.env.acc.t_hw);
    maybe(j, "cacc_t_hw", cfg.env.cacc.t_hw);
    maybe(j, "standstill_gap", cfg.env.acc.s0);
    maybe(j, "sensing_range", cfg.env.sensing_range);
    cfg.env.cacc.k_p = cfg.env.acc.k_p;
    cfg.env.cacc.k_d = cfg.env.acc.k_d;
    cfg.env.cacc.s0 = cfg.env.acc.s0;
    cfg.env.cacc.ff_T = cfg.env.cacc.t_hw;
    cfg.env.cacc.ff_tau = sc.bicycle.tau;
    cfg.env.engagement.t_hw = cfg.env.cacc.t_hw;
    cfg.env.engagement.s0 = cfg.env.cacc.s0;
    maybe(j, "engagement_factor", cfg.env.engagement.factor);

    maybe(j, "mobil_politeness", cfg.env.mobil.politeness);
    maybe(j, "mobil_delta_a_t", cfg.env.mobil.delta_a_t);
    maybe(j, "mobil_b_s", cfg.env.mobil.b_s);
    maybe(j, "mobil_a_b", cfg.env.mobil.a_b);
    maybe(j, "mobil_delta_t_l", cfg.env.mobil.delta_t_l);
    maybe(j, "greedy_alpha", cfg.env.greedy.alpha);
    maybe(j, "greedy_m", cfg.env.greedy.m_dev);
    maybe(j, "greedy_r", cfg.env.greedy.r_range);
    maybe(j, "rlc_prob", cfg.env.greedy.rlc_prob);
    maybe(j, "rlc_reference_lc", cfg.env.rlc_reference_lc);

    maybe(j, "w1", cfg.env.reward.w1);
    maybe(j, "w2", cfg.env.reward.w2);
    maybe(j, "w3", cfg.env.reward.w3);
    maybe(j, "r_decay", cfg.env.reward.r_decay);
    maybe(j, "m_decay", cfg.env.reward.m_decay);
    maybe(j, "h_min", cfg.env.reward.h_min);

    maybe(j, "L_tail", cfg.env.grid.l_tail);
    maybe(j, "L_head", cfg.env.grid.l_head);
    maybe(j, "L_grid", cfg.env.grid.l_grid);
    maybe(j, "v_max", cfg.env.grid.v_max);
    cfg.env.grid.lanes = sc.road.lane_count;

    double t_d = 2.0;
    maybe(j, "T_D", t_d);
    cfg.env.maneuver.tf_candidates = {t_d, t_d + 1.0, t_d + 2.0};
    cfg.env.maneuver.mpc.dt = sc.road.dt;
    maybe(j, "decision_period", cfg.env.decision_period);
    maybe(j, "horizon", cfg.env.horizon);

    maybe(j, "episodes", cfg.train.episodes);
    maybe(j, "gamma", cfg.train.gamma);
    maybe(j, "learning_rate", cfg.train.learning_rate);
    maybe(j, "memory_size", cfg.train.replay_capacity);
    maybe(j, "batch_size", cfg.train.batch_size);
    maybe(j, "eps_start", cfg.train.eps_start);
    maybe(j, "eps_end", cfg.train.eps_end);
    maybe(j, "eps_decay_frac", cfg.train.eps_decay_frac);
    maybe(j, "target_update_period", cfg.train.target_update_period);
    maybe(j, "checkpoint_period", cfg.train.checkpoint_period);
    maybe(j, "train_steps_per_episode", cfg.train.train_steps_per_episode);
    maybe(j, "train_seed", cfg.train.seed);
    if (j.contains("mpr_list")) {
        cfg.train.mpr_list = j.at("mpr_list").get<std::vector<double>>();
    }
    return cfg;
}

std::string config_to_json(const FileConfig& cfg) {
    const ScenarioConfig& sc = cfg.env.scenario;
    json j;
    j["lane_count"] = sc.road.lane_count;
    j["segment_length"] = sc.road.segment_length;
    j["lane_width"] = sc.road.lane_width;
    j["dt"] = sc.road.dt;
    j["vehicle_count"] = sc.vehicle_count;
    j["mpr"] = sc.mpr;
    j["spawn_min"] = sc.spawn_min;
    j["spawn_max"] = sc.spawn_max;
    j["desired_speed_hv"] = sc.desired_speed_hv;
    j["desired_speed_cav"] = sc.desired_speed_cav;
    j["tau"] = sc.bicycle.tau;
    j["w1"] = cfg.env.reward.w1;
    j["w2"] = cfg.env.reward.w2;
    j["w3"] = cfg.env.reward.w3;
    j["L_tail"] = cfg.env.grid.l_tail;
    j["L_head"] = cfg.env.grid.l_head;
    j["L_grid"] = cfg.env.grid.l_grid;
    j["T_D"] = cfg.env.maneuver.tf_candidates.front();
    j["learning_rate"] = cfg.train.learning_rate;
    j["memory_size"] = cfg.train.replay_capacity;
    j["batch_size"] = cfg.train.batch_size;
    j["gamma"] = cfg.train.gamma;
    j["episodes"] = cfg.train.episodes;
    j["horizon"] = cfg.env.horizon;
    return j.dump(2);
}

}  // namespace psim
