#include "platoonsim/rl/qmix.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>

#include <json.hpp>

#include "platoonsim/common/errors.hpp"
#include "platoonsim/nk/checkpoint.hpp"

namespace psim::rl {

using nk::ParamVector;

QmixModel QmixModel::create(const AgentNetConfig& acfg, const MixerConfig& mcfg,
                            std::uint64_t seed) {
    QmixModel m;
    m.agent_cfg = acfg;
    m.mixer_cfg = mcfg;
    m.agent_layout = build_agent_layout(acfg);
    m.mixer_layout = build_mixer_layout(mcfg);
    RandomStream rng(seed);
    m.agent_params = nk::init_params(m.agent_layout, rng);
    m.mixer_params = nk::init_params(m.mixer_layout, rng);
    m.agent_target = m.agent_params;
    m.mixer_target = m.mixer_params;
    return m;
}

void QmixModel::update_target() {
    agent_target = agent_params;
    mixer_target = mixer_params;
}

std::vector<int> select_actions(const QmixModel& model,
                                const std::vector<AgentDecisionInput>& inputs,
                                double epsilon, RandomStream& rng,
                                std::vector<std::vector<double>>& h_next,
                                std::vector<std::vector<double>>* q_values) {
    const int actions = model.agent_cfg.actions;
    std::vector<int> out(inputs.size(), 0);
    h_next.assign(inputs.size(),
                  std::vector<double>(model.agent_cfg.gru_hidden, 0.0));
    if (q_values) q_values->assign(inputs.size(), std::vector<double>(actions, 0.0));

    for (std::size_t i = 0; i < inputs.size(); ++i) {
        const auto& in = inputs[i];
        std::vector<double> q(actions, 0.0);
        agent_forward(model.agent_cfg, model.agent_layout, model.agent_params,
                      in.obs, in.obs_len, in.last_action, in.agent_slot,
                      in.h_prev, q.data(), h_next[i].data(), nullptr);
        int best = 0;
        for (int a = 1; a < actions; ++a) {
            if (q[a] > q[best]) best = a;
        }
        int chosen = best;
        if (epsilon > 0.0 && rng.next_double() < epsilon) {
            chosen = static_cast<int>(rng.next_index(actions));
        }
        out[i] = index_action(chosen);
        if (q_values) (*q_values)[i] = q;
    }
    return out;
}

namespace {

// Per-sample TD contribution: loss plus gradients into the provided buffers.
double td_sample(const QmixModel& model, const ReplayBuffer::Sample& sample,
                 double gamma, double inv_batch, ParamVector& grad_agent,
                 ParamVector& grad_mixer) {
    const AgentNetConfig& acfg = model.agent_cfg;
    const int n_max = acfg.n_max;
    const int hidden = acfg.gru_hidden;
    const TickData& cur = *sample.cur;

    std::vector<AgentCache> caches(n_max);
    std::vector<double> chosen(n_max, 0.0);
    std::vector<std::vector<double>> qs(n_max);
    std::vector<double> h_scratch(hidden);
    for (int i = 0; i < n_max; ++i) {
        if (!cur.mask[i]) continue;
        qs[i].assign(acfg.actions, 0.0);
        agent_forward(acfg, model.agent_layout, model.agent_params,
                      cur.obs[i].data(), cur.obs[i].size(), cur.last_actions[i],
                      i, cur.h_prev.data() + static_cast<std::size_t>(i) * hidden,
                      qs[i].data(), h_scratch.data(), &caches[i]);
        chosen[i] = qs[i][action_index(cur.actions[i])];
    }

    MixerCache mix_cache;
    const double q_total =
        mixer_forward(model.mixer_cfg, model.mixer_layout, model.mixer_params,
                      chosen.data(), cur.mask.data(), cur.global_state.data(),
                      &mix_cache);

    double target = cur.reward;
    if (!cur.terminal) {
        if (sample.next == nullptr) {
            throw ContractViolation("td_loss: non-terminal transition lacks successor");
        }
        const TickData& nxt = *sample.next;
        std::vector<double> best_next(n_max, 0.0);
        std::vector<double> q_next(acfg.actions, 0.0);
        for (int i = 0; i < n_max; ++i) {
            if (!nxt.mask[i]) continue;
            agent_forward(acfg, model.agent_layout, model.agent_target,
                          nxt.obs[i].data(), nxt.obs[i].size(),
                          nxt.last_actions[i], i,
                          nxt.h_prev.data() + static_cast<std::size_t>(i) * hidden,
                          q_next.data(), h_scratch.data(), nullptr);
            best_next[i] = *std::max_element(q_next.begin(), q_next.end());
        }
        const double q_total_next = mixer_forward(
            model.mixer_cfg, model.mixer_layout, model.mixer_target,
            best_next.data(), nxt.mask.data(), nxt.global_state.data(), nullptr);
        target += gamma * q_total_next;
    }

    const double err = q_total - target;
    const double g = 2.0 * err * inv_batch;

    std::vector<double> gqs(n_max, 0.0);
    mixer_backward(model.mixer_cfg, model.mixer_layout, model.mixer_params,
                   mix_cache, g, grad_mixer, gqs.data());
    std::vector<double> gq(acfg.actions, 0.0);
    for (int i = 0; i < n_max; ++i) {
        if (!cur.mask[i] || gqs[i] == 0.0) continue;
        std::fill(gq.begin(), gq.end(), 0.0);
        gq[action_index(cur.actions[i])] = gqs[i];
        agent_backward(acfg, model.agent_layout, model.agent_params, caches[i],
                       gq.data(), nullptr, grad_agent);
    }
    return err * err;
}

}  // namespace

double td_loss(const QmixModel& model,
               const std::vector<ReplayBuffer::Sample>& batch, double gamma,
               ParamVector& grad_agent, ParamVector& grad_mixer,
               const ExecPolicy& exec) {
    const std::size_t b = batch.size();
    if (b == 0) throw ContractViolation("td_loss: empty batch");
    const double inv_batch = 1.0 / static_cast<double>(b);

    // Chunked map-reduce: per-sample gradients land in slots, then reduce in
    // fixed sample order so the result is independent of thread count.
    const std::size_t chunk = 16;
    std::vector<double> losses(b, 0.0);
    std::vector<ParamVector> slot_agent(std::min(chunk, b));
    std::vector<ParamVector> slot_mixer(std::min(chunk, b));

    double loss = 0.0;
    for (std::size_t base = 0; base < b; base += chunk) {
        const std::size_t count = std::min(chunk, b - base);
        for (std::size_t k = 0; k < count; ++k) {
            slot_agent[k].assign(model.agent_layout.total_size(), 0.0);
            slot_mixer[k].assign(model.mixer_layout.total_size(), 0.0);
        }
        parallel_for(exec, count, [&](std::size_t k) {
            losses[base + k] = td_sample(model, batch[base + k], gamma,
                                         inv_batch, slot_agent[k], slot_mixer[k]);
        });
        for (std::size_t k = 0; k < count; ++k) {
            loss += losses[base + k];
            for (std::size_t j = 0; j < grad_agent.size(); ++j) {
                grad_agent[j] += slot_agent[k][j];
            }
            for (std::size_t j = 0; j < grad_mixer.size(); ++j) {
                grad_mixer[j] += slot_mixer[k][j];
            }
        }
    }
    loss *= inv_batch;
    if (!std::isfinite(loss)) throw TrainingError("td_loss: non-finite loss");
    return loss;
}

double epsilon_at(const TrainConfig& cfg, int episode) {
    const double horizon = std::max(1.0, cfg.eps_decay_frac * cfg.episodes);
    const double frac = std::min(1.0, episode / horizon);
    return cfg.eps_start + (cfg.eps_end - cfg.eps_start) * frac;
}

TrainResult train(QmixModel& model, const TrainConfig& cfg,
                  const RolloutFn& rollout) {
    TrainResult result;
    ReplayBuffer replay(cfg.replay_capacity,
                        RandomStream::derive_seed(cfg.seed, 0x5eed));
    nk::AdamState adam_agent(model.agent_layout.total_size(), cfg.learning_rate);
    nk::AdamState adam_mixer(model.mixer_layout.total_size(), cfg.learning_rate);
    const ExecPolicy exec = cfg.parallel ? ExecPolicy::omp() : ExecPolicy::serial();

    const bool write_files = !cfg.out_dir.empty();
    if (write_files) std::filesystem::create_directories(cfg.out_dir);
    auto checkpoint_path = [&](const std::string& stem) {
        return cfg.out_dir + "/" + stem + ".ckpt";
    };
    if (write_files) {
        save_qmix_checkpoint(checkpoint_path("initial"), model);
    }

    std::vector<double> reward_window;
    double best_avg = -std::numeric_limits<double>::infinity();
    long train_steps = 0;

    for (int ep = 0; ep < cfg.episodes; ++ep) {
        RolloutRequest req;
        req.episode = ep;
        req.epsilon = epsilon_at(cfg, ep);
        req.seed = RandomStream::derive_seed(cfg.seed, 1000 + ep);
        req.mpr = cfg.mpr_list[ep % cfg.mpr_list.size()];
        RolloutResult rr = rollout(req);
        replay.add(std::move(rr.record));

        double loss_sum = 0.0;
        int loss_count = 0;
        for (int k = 0; k < cfg.train_steps_per_episode; ++k) {
            if (replay.total_transitions() <
                static_cast<std::size_t>(cfg.batch_size)) {
                break;
            }
            const auto batch = replay.sample(cfg.batch_size);
            ParamVector grad_agent(model.agent_layout.total_size(), 0.0);
            ParamVector grad_mixer(model.mixer_layout.total_size(), 0.0);
            const double loss =
                td_loss(model, batch, cfg.gamma, grad_agent, grad_mixer, exec);
            nk::optimizer_step(model.agent_params, grad_agent, adam_agent);
            nk::optimizer_step(model.mixer_params, grad_mixer, adam_mixer);
            ++train_steps;
            loss_sum += loss;
            ++loss_count;
            if (train_steps % cfg.target_update_period == 0) {
                model.update_target();
            }
        }

        TrainLogRow row;
        row.episode = ep;
        row.epsilon = req.epsilon;
        row.mean_reward = rr.mean_reward;
        row.platoon_rate = rr.platoon_rate;
        row.loss = loss_count > 0 ? loss_sum / loss_count
                                  : std::numeric_limits<double>::quiet_NaN();
        result.log.push_back(row);

        reward_window.push_back(rr.mean_reward);
        if (static_cast<int>(reward_window.size()) > cfg.best_window) {
            reward_window.erase(reward_window.begin());
        }
        if (static_cast<int>(reward_window.size()) == cfg.best_window) {
            double avg = 0.0;
            for (double r : reward_window) avg += r;
            avg /= cfg.best_window;
            if (avg > best_avg) {
                best_avg = avg;
                if (write_files) {
                    save_qmix_checkpoint(checkpoint_path("best"), model);
                    result.best_checkpoint = checkpoint_path("best");
                }
            }
        }
        if (write_files && cfg.checkpoint_period > 0 &&
            (ep + 1) % cfg.checkpoint_period == 0) {
            save_qmix_checkpoint(
                checkpoint_path("ep" + std::to_string(ep + 1)), model);
        }
    }

    result.best_window_reward = best_avg;
    result.train_steps = train_steps;
    if (write_files) {
        save_qmix_checkpoint(checkpoint_path("final"), model);
        result.final_checkpoint = checkpoint_path("final");
        if (result.best_checkpoint.empty()) {
            result.best_checkpoint = result.final_checkpoint;
        }
    }
    return result;
}

void save_qmix_checkpoint(const std::string& path, const QmixModel& model) {
    nk::CheckpointFile file;
    file.kind =
        model.agent_cfg.encoder == EncoderKind::Conv ? "cnn_qmix" : "flat_qmix";
    nlohmann::json meta;
    meta["encoder"] = file.kind;
    meta["grid_channels"] = model.agent_cfg.grid_channels;
    meta["grid_lanes"] = model.agent_cfg.grid_lanes;
    meta["grid_cells"] = model.agent_cfg.grid_cells;
    meta["flat_dim"] = model.agent_cfg.flat_dim;
    meta["flat_enc_units"] = model.agent_cfg.flat_enc_units;
    meta["fixed_n"] = model.agent_cfg.fixed_n;
    meta["n_max"] = model.agent_cfg.n_max;
    meta["actions"] = model.agent_cfg.actions;
    meta["fc1_units"] = model.agent_cfg.fc1_units;
    meta["gru_hidden"] = model.agent_cfg.gru_hidden;
    meta["fc2_units"] = model.agent_cfg.fc2_units;
    meta["mixer_state_dim"] = model.mixer_cfg.state_dim;
    meta["mixer_hidden"] = model.mixer_cfg.hidden;
    file.meta_json = meta.dump();
    file.groups.push_back(
        {"agent", {model.agent_layout, model.agent_params}});
    file.groups.push_back(
        {"mixer", {model.mixer_layout, model.mixer_params}});
    nk::save_checkpoint(path, file);
}

QmixModel load_qmix_checkpoint(const std::string& path) {
    const nk::CheckpointFile file = nk::load_checkpoint(path);
    const nlohmann::json meta = nlohmann::json::parse(file.meta_json);
    AgentNetConfig acfg;
    acfg.encoder = file.kind == "flat_qmix" ? EncoderKind::Flat : EncoderKind::Conv;
    acfg.grid_channels = meta.at("grid_channels").get<int>();
    acfg.grid_lanes = meta.at("grid_lanes").get<int>();
    acfg.grid_cells = meta.at("grid_cells").get<int>();
    acfg.flat_dim = meta.at("flat_dim").get<int>();
    acfg.flat_enc_units = meta.at("flat_enc_units").get<int>();
    acfg.fixed_n = meta.at("fixed_n").get<int>();
    acfg.n_max = meta.at("n_max").get<int>();
    acfg.actions = meta.at("actions").get<int>();
    acfg.fc1_units = meta.at("fc1_units").get<int>();
    acfg.gru_hidden = meta.at("gru_hidden").get<int>();
    acfg.fc2_units = meta.at("fc2_units").get<int>();
    MixerConfig mcfg;
    mcfg.n_max = acfg.n_max;
    mcfg.state_dim = meta.at("mixer_state_dim").get<int>();
    mcfg.hidden = meta.at("mixer_hidden").get<int>();

    QmixModel model = QmixModel::create(acfg, mcfg, 0);
    for (const auto& [name, group] : file.groups) {
        if (name == "agent") {
            if (group.values.size() != model.agent_params.size()) {
                throw ConfigError("checkpoint agent group size mismatch");
            }
            model.agent_params = group.values;
        } else if (name == "mixer") {
            if (group.values.size() != model.mixer_params.size()) {
                throw ConfigError("checkpoint mixer group size mismatch");
            }
            model.mixer_params = group.values;
        }
    }
    model.update_target();
    return model;
}

}  // namespace psim::rl
