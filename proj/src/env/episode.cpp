#include "platoonsim/env/episode.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "platoonsim/common/errors.hpp"

namespace psim {

PolicyKind policy_from_string(const std::string& name) {
    if (name == "mobil") return PolicyKind::Mobil;
    if (name == "greedy") return PolicyKind::Greedy;
    if (name == "greedy_rlc") return PolicyKind::GreedyRlc;
    if (name == "cnn_qmix") return PolicyKind::CnnQmix;
    if (name == "flat_qmix") return PolicyKind::FlatQmix;
    throw ConfigError("unknown policy: " + name);
}

std::string policy_name(PolicyKind kind) {
    switch (kind) {
        case PolicyKind::Mobil: return "mobil";
        case PolicyKind::Greedy: return "greedy";
        case PolicyKind::GreedyRlc: return "greedy_rlc";
        case PolicyKind::CnnQmix: return "cnn_qmix";
        case PolicyKind::FlatQmix: return "flat_qmix";
    }
    return "unknown";
}

EnvConfig make_env_config(const ScenarioConfig& scenario) {
    EnvConfig env;
    env.scenario = scenario;
    env.acc.t_hw = 1.2;
    env.cacc.t_hw = 0.6;
    env.cacc.ff_T = 0.6;
    env.cacc.ff_tau = scenario.bicycle.tau;
    env.engagement.t_hw = env.cacc.t_hw;
    env.engagement.s0 = env.cacc.s0;
    env.grid.lanes = scenario.road.lane_count;
    env.maneuver.mpc.dt = scenario.road.dt;
    return env;
}

int flat_observation_dim(int fixed_n, int lane_count) {
    return (2 + lane_count) + fixed_n * (3 + lane_count);
}

std::vector<double> flat_observation(const WorldState& world, int ego_id,
                                     const std::vector<int>& slot_vehicle,
                                     const EnvConfig& env) {
    const VehicleState& ego = world.vehicle(ego_id);
    const int lanes = world.road.lane_count;
    std::vector<double> out;
    out.reserve(flat_observation_dim(static_cast<int>(slot_vehicle.size()), lanes));
    out.push_back(ego.v / env.grid.v_max);
    for (int l = 0; l < lanes; ++l) out.push_back(ego.lane == l ? 1.0 : 0.0);
    out.push_back(ego.x / world.road.segment_length);
    for (int vid : slot_vehicle) {
        const VehicleState& v = world.vehicle(vid);
        const bool present = !v.exited;
        out.push_back(present ? 1.0 : 0.0);
        out.push_back(present ? (v.x - ego.x) / env.greedy.r_range : 0.0);
        out.push_back(present ? v.v / env.grid.v_max : 0.0);
        for (int l = 0; l < lanes; ++l) {
            out.push_back(present && v.lane == l ? 1.0 : 0.0);
        }
    }
    return out;
}

namespace {

struct EngineState {
    std::map<int, ManeuverTracker> trackers;
    std::map<int, CaccFilter> filters;
    long cav_lane_changes = 0;
};

// Longitudinal command for a lane-keeping vehicle.
double keeping_accel(const WorldState& world, const VehicleState& veh,
                     const EnvConfig& env, EngineState& engine, double dt) {
    const Neighborhood nb = neighbors(world, veh.id, veh.lane);
    const VehicleKind pred_kind = nb.predecessor
                                      ? world.vehicle(nb.predecessor->id).kind
                                      : VehicleKind::HumanDriven;
    const LongitudinalMode mode = select_longitudinal_mode(
        veh, nb.predecessor, pred_kind, env.sensing_range);
    switch (mode) {
        case LongitudinalMode::IDM: {
            engine.filters[veh.id].reset();
            if (!nb.predecessor || nb.predecessor->gap > env.sensing_range) {
                return idm_accel(veh.v, kFreeFlowGap, 0.0, env.idm);
            }
            const double gap = std::max(nb.predecessor->gap, 1.0e-3);
            return idm_accel(veh.v, gap, nb.predecessor->delta_v, env.idm);
        }
        case LongitudinalMode::ACC: {
            engine.filters[veh.id].reset();
            const VehicleState& pred = world.vehicle(nb.predecessor->id);
            return acc_command(nb.predecessor->gap, veh.v, pred.v, env.acc);
        }
        case LongitudinalMode::CACC: {
            const VehicleState& pred = world.vehicle(nb.predecessor->id);
            return cacc_command(nb.predecessor->gap, veh.v, pred.v, pred.a,
                                env.cacc, engine.filters[veh.id], dt);
        }
        case LongitudinalMode::FreeFlow:
        default:
            engine.filters[veh.id].reset();
            return free_flow_command(veh.v, world.desired_speed(veh.kind), env.acc);
    }
}

int tick_max_chain(const WorldState& world, const EngagementRule& rule) {
    int max_chain = 0;
    for (const auto& chain : platoon_chains(world, rule)) {
        max_chain = std::max(max_chain, static_cast<int>(chain.size()));
    }
    return max_chain;
}

TickRecord snapshot_tick(const WorldState& world, const EnvConfig& env) {
    TickRecord rec;
    rec.time = world.time;
    const int n = static_cast<int>(world.vehicles.size());
    rec.present.assign(n, 0);
    rec.engaged.assign(n, 0);
    for (const auto& v : world.vehicles) {
        rec.present[v.id] = v.exited ? 0 : 1;
        rec.engaged[v.id] = cacc_engaged(world, v.id, env.engagement) ? 1 : 0;
    }
    rec.max_chain = tick_max_chain(world, env.engagement);
    return rec;
}

}  // namespace

EpisodeOutcome run_episode(const EnvConfig& env, const EpisodeOptions& opts) {
    ScenarioConfig scenario = env.scenario;
    scenario.seed = opts.seed;
    scenario.mpr = opts.mpr;

    WorldState world =
        opts.initial_world ? *opts.initial_world : build_scenario(scenario);
    const int vehicle_count = static_cast<int>(world.vehicles.size());
    const double dt = world.road.dt;
    const int steps_per_tick =
        std::max(1, static_cast<int>(env.decision_period / dt + 0.5));

    // Agent slots: CAV ids in ascending order.
    std::vector<int> slot_vehicle;
    for (const auto& v : world.vehicles) {
        if (v.is_cav()) slot_vehicle.push_back(v.id);
    }
    const int agent_count = static_cast<int>(slot_vehicle.size());

    const bool rl_policy = opts.policy == PolicyKind::CnnQmix ||
                           opts.policy == PolicyKind::FlatQmix;
    rl::QmixModel* model = opts.model;
    if (rl_policy) {
        if (model == nullptr) {
            throw ContractViolation("run_episode: learned policy without a model");
        }
        if (opts.policy == PolicyKind::FlatQmix) {
            if (agent_count != model->agent_cfg.fixed_n) {
                throw AgentCountMismatch(
                    "flat_qmix model trained for " +
                    std::to_string(model->agent_cfg.fixed_n) +
                    " agents evaluated with " + std::to_string(agent_count));
            }
        } else {
            if (agent_count > model->agent_cfg.n_max) {
                throw ContractViolation("run_episode: agent count exceeds n_max");
            }
            if (model->agent_cfg.grid_lanes != env.grid.lanes ||
                model->agent_cfg.grid_cells != env.grid.cells() ||
                model->agent_cfg.grid_channels != env.grid.channels) {
                throw ConfigError("checkpoint grid shape does not match scenario");
            }
        }
        if (opts.collect_transitions) {
            const std::size_t state_dim =
                encode_global_state(world, env.grid).data.size();
            if (state_dim !=
                static_cast<std::size_t>(model->mixer_cfg.state_dim)) {
                throw ConfigError("mixer state width does not match scenario grid");
            }
        }
    }

    EngineState engine;
    const AccelModels models = env.accel_models();
    RandomStream policy_rng(RandomStream::derive_seed(opts.seed, 0xAC710Full));

    const int n_max = rl_policy ? model->agent_cfg.n_max : agent_count;
    const int hidden = rl_policy ? model->agent_cfg.gru_hidden : 0;
    std::vector<double> hiddens(static_cast<std::size_t>(std::max(1, n_max)) *
                                    std::max(1, hidden),
                                0.0);
    std::vector<int> last_actions(std::max(1, n_max), 0);

    EpisodeOutcome outcome;
    EpisodeTrace& trace = outcome.trace;
    trace.vehicle_count = vehicle_count;
    trace.dt = dt;
    for (const auto& v : world.vehicles) trace.kinds.push_back(v.kind);
    trace.abs_accel_integral.assign(vehicle_count, 0.0);
    trace.lane_changes.assign(vehicle_count, 0);
    trace.ticks.push_back(snapshot_tick(world, env));

    std::vector<double> team_rewards;
    bool terminal = false;
    bool collided = false;

    const int max_ticks =
        static_cast<int>(env.horizon / env.decision_period + 0.5);

    for (int tick = 0; tick < max_ticks && !terminal; ++tick) {
        // Agents present at tick start (rewards + transition mask).
        std::vector<int> present_cavs;
        for (int vid : slot_vehicle) {
            if (!world.vehicle(vid).exited) present_cavs.push_back(vid);
        }

        // --- decisions ---
        std::map<int, int> actions;
        for (const auto& v : world.vehicles) {
            if (v.exited || v.lc_phase != LcPhase::Keeping) continue;
            if (!v.is_cav()) {
                actions[v.id] = mobil_decide(world, v.id, env.mobil, models);
            }
        }
        rl::TickData tick_data;
        if (opts.policy == PolicyKind::Mobil) {
            for (int vid : present_cavs) {
                const VehicleState& v = world.vehicle(vid);
                if (v.lc_phase != LcPhase::Keeping) continue;
                actions[vid] = mobil_decide(world, vid, env.mobil, models);
            }
        } else if (opts.policy == PolicyKind::Greedy) {
            for (auto [vid, a] :
                 greedy_decide(world, env.greedy, env.engagement, env.mobil, models)) {
                actions[vid] = a;
            }
        } else if (opts.policy == PolicyKind::GreedyRlc) {
            int budget = std::max(
                0, static_cast<int>(env.rlc_reference_lc + 0.5) -
                       static_cast<int>(engine.cav_lane_changes));
            for (auto [vid, a] :
                 greedy_rlc_decide(world, env.greedy, env.engagement, env.mobil,
                                   models, budget, policy_rng)) {
                actions[vid] = a;
            }
        } else {
            // Learned policies: encode observations, epsilon-greedy actions.
            std::vector<rl::AgentDecisionInput> inputs;
            std::vector<int> input_slots;
            std::vector<std::vector<double>> obs_store(n_max);
            tick_data.obs.assign(n_max, {});
            tick_data.mask.assign(n_max, 0);
            tick_data.last_actions.assign(n_max, 0);
            tick_data.actions.assign(n_max, 0);
            tick_data.h_prev = hiddens;
            for (int slot = 0; slot < agent_count; ++slot) {
                const int vid = slot_vehicle[slot];
                if (world.vehicle(vid).exited) continue;
                if (opts.policy == PolicyKind::CnnQmix) {
                    obs_store[slot] = encode_grid(world, vid, env.grid).data;
                } else {
                    obs_store[slot] = flat_observation(world, vid, slot_vehicle, env);
                }
                rl::AgentDecisionInput in;
                in.obs = obs_store[slot].data();
                in.obs_len = obs_store[slot].size();
                in.last_action = last_actions[slot];
                in.agent_slot = slot;
                in.h_prev = hiddens.data() + static_cast<std::size_t>(slot) * hidden;
                inputs.push_back(in);
                input_slots.push_back(slot);
                tick_data.mask[slot] = 1;
                tick_data.last_actions[slot] = last_actions[slot];
            }
            std::vector<std::vector<double>> h_next;
            const std::vector<int> chosen =
                rl::select_actions(*model, inputs, opts.epsilon, policy_rng, h_next);
            for (std::size_t k = 0; k < input_slots.size(); ++k) {
                const int slot = input_slots[k];
                const int vid = slot_vehicle[slot];
                actions[vid] = chosen[k];
                last_actions[slot] = chosen[k];
                std::copy(h_next[k].begin(), h_next[k].end(),
                          hiddens.begin() + static_cast<std::size_t>(slot) * hidden);
                tick_data.actions[slot] = chosen[k];
                tick_data.obs[slot] = std::move(obs_store[slot]);
            }
            if (opts.collect_transitions) {
                tick_data.global_state = encode_global_state(world, env.grid).data;
            }
        }

        // --- initiate maneuvers ---
        for (const auto& [vid, action] : actions) {
            if (action == 0) continue;
            VehicleState& veh = world.vehicle(vid);
            if (veh.exited || veh.lc_phase != LcPhase::Keeping) continue;
            const int target = veh.lane + action;
            if (target < 0 || target >= world.road.lane_count) continue;
            engine.trackers.emplace(
                vid, ManeuverTracker(world, veh, target, env.maneuver));
            engine.filters[vid].reset();
            veh.lc_phase = LcPhase::Executing;
            veh.lc_elapsed = 0.0;
            veh.last_lc_time = world.time;
            ++trace.lane_changes[vid];
            if (veh.is_cav()) ++engine.cav_lane_changes;
        }

        // --- simulation substeps ---
        for (int k = 0; k < steps_per_tick; ++k) {
            std::map<int, ControlInput> controls;
            for (const auto& veh : world.vehicles) {
                if (veh.exited) continue;
                auto it = engine.trackers.find(veh.id);
                if (it != engine.trackers.end()) {
                    it->second.check_abort(world, veh, env.maneuver);
                    controls[veh.id] = it->second.control(world, veh, env.maneuver);
                } else {
                    controls[veh.id] =
                        ControlInput{keeping_accel(world, veh, env, engine, dt), 0.0};
                }
            }
            world = step_world(world, controls, dt);

            for (const auto& veh : world.vehicles) {
                if (veh.exited) continue;
                trace.speed_sum += veh.v;
                ++trace.speed_samples;
                trace.abs_accel_integral[veh.id] += std::abs(veh.a) * dt;
            }

            // Advance/complete maneuvers; drop trackers of exited vehicles.
            for (auto it = engine.trackers.begin(); it != engine.trackers.end();) {
                VehicleState& veh = world.vehicle(it->first);
                if (veh.exited) {
                    veh.lc_phase = LcPhase::Keeping;
                    it = engine.trackers.erase(it);
                    continue;
                }
                it->second.advance(dt);
                veh.lc_elapsed = it->second.elapsed();
                if (it->second.done()) {
                    veh.y = world.road.lane_center(it->second.target_lane());
                    veh.theta = 0.0;
                    veh.lane = world.road.lane_of(veh.y);
                    veh.lc_phase = LcPhase::Keeping;
                    it = engine.trackers.erase(it);
                } else {
                    ++it;
                }
            }

            const auto collisions = detect_collisions(world);
            if (!collisions.empty()) {
                collided = true;
                trace.collisions = static_cast<int>(collisions.size());
                break;
            }
        }

        // --- post-tick bookkeeping ---
        trace.ticks.push_back(snapshot_tick(world, env));

        double reward = env.reward.collision_penalty;
        if (!collided) {
            double sum = 0.0;
            for (int vid : present_cavs) {
                sum += agent_reward(world, vid, false, env.reward, env.engagement);
            }
            reward = present_cavs.empty()
                         ? 0.0
                         : sum / static_cast<double>(present_cavs.size());
        }
        team_rewards.push_back(reward);

        terminal = collided || world.active_count() == 0 ||
                   world.time >= env.horizon - 1e-9 || tick == max_ticks - 1;

        if (rl_policy && opts.collect_transitions) {
            tick_data.reward = reward;
            tick_data.terminal = terminal;
            outcome.record.ticks.push_back(std::move(tick_data));
        }
    }

    trace.duration = world.time;
    outcome.metrics = platoon_metrics(trace);
    outcome.collided = collided;
    outcome.duration = world.time;
    if (!team_rewards.empty()) {
        double sum = 0.0;
        for (double r : team_rewards) sum += r;
        outcome.mean_team_reward = sum / static_cast<double>(team_rewards.size());
    }
    return outcome;
}

}  // namespace psim
