#include "platoonsim/rl/agent_net.hpp"

#include <cstring>

#include "platoonsim/common/errors.hpp"

namespace psim::rl {

using nk::Conv2dSpec;
using nk::FcSpec;
using nk::GruGrads;
using nk::GruSpec;
using nk::GruWeights;
using nk::ParamLayout;
using nk::ParamVector;

ParamLayout build_agent_layout(const AgentNetConfig& cfg) {
    ParamLayout layout;
    if (cfg.encoder == EncoderKind::Conv) {
        const auto c1 = cfg.conv1();
        const auto c2 = cfg.conv2();
        const auto c3 = cfg.conv3();
        layout.add("conv1.w", {c1.filters, c1.in_c, c1.kh, c1.kw}, c1.in_c * c1.kh * c1.kw);
        layout.add("conv1.b", {c1.filters}, 0);
        layout.add("conv2.w", {c2.filters, c2.in_c, c2.kh, c2.kw}, c2.in_c * c2.kh * c2.kw);
        layout.add("conv2.b", {c2.filters}, 0);
        layout.add("conv3.w", {c3.filters, c3.in_c, c3.kh, c3.kw}, c3.in_c * c3.kh * c3.kw);
        layout.add("conv3.b", {c3.filters}, 0);
    } else {
        layout.add("enc.w", {cfg.flat_enc_units, cfg.flat_dim}, cfg.flat_dim);
        layout.add("enc.b", {cfg.flat_enc_units}, 0);
    }
    layout.add("fc1.w", {cfg.fc1_units, cfg.trunk_in()}, cfg.trunk_in());
    layout.add("fc1.b", {cfg.fc1_units}, 0);
    const int H = cfg.gru_hidden, I = cfg.fc1_units;
    layout.add("gru.wz", {H, I}, I);
    layout.add("gru.uz", {H, H}, H);
    layout.add("gru.bz", {H}, 0);
    layout.add("gru.wr", {H, I}, I);
    layout.add("gru.ur", {H, H}, H);
    layout.add("gru.br", {H}, 0);
    layout.add("gru.wc", {H, I}, I);
    layout.add("gru.uc", {H, H}, H);
    layout.add("gru.bc", {H}, 0);
    layout.add("fc2.w", {cfg.fc2_units, H}, H);
    layout.add("fc2.b", {cfg.fc2_units}, 0);
    layout.add("head.w", {cfg.actions, cfg.fc2_units}, cfg.fc2_units);
    layout.add("head.b", {cfg.actions}, 0);
    return layout;
}

namespace {

// The flat encoder reuses fc1 dimensions for its first layer; see below.
FcSpec flat_enc_spec(const AgentNetConfig& cfg) {
    return {cfg.flat_dim, cfg.flat_enc_units, true};
}

}  // namespace

void agent_forward(const AgentNetConfig& cfg, const ParamLayout& layout,
                   const ParamVector& params, const double* obs,
                   std::size_t obs_len, int last_action, int agent_slot,
                   const double* h_prev, double* q, double* h_next,
                   AgentCache* cache) {
    if (cfg.encoder == EncoderKind::Flat &&
        obs_len != static_cast<std::size_t>(cfg.flat_dim)) {
        throw AgentCountMismatch(
            "flat agent network built for a fixed agent count received an "
            "observation of width " + std::to_string(obs_len) + ", expected " +
            std::to_string(cfg.flat_dim));
    }
    if (obs_len != static_cast<std::size_t>(cfg.obs_dim())) {
        throw ContractViolation("agent_forward: observation shape mismatch");
    }
    if (agent_slot < 0 || agent_slot >= cfg.n_max) {
        throw ContractViolation("agent_forward: agent slot out of range");
    }

    AgentCache local;
    AgentCache& c = cache ? *cache : local;
    c.obs.assign(obs, obs + obs_len);
    c.h_prev.assign(h_prev, h_prev + cfg.gru_hidden);

    // Encoder.
    const double* encoded = nullptr;
    int encoded_len = 0;
    if (cfg.encoder == EncoderKind::Conv) {
        const auto s1 = cfg.conv1();
        const auto s2 = cfg.conv2();
        const auto s3 = cfg.conv3();
        c.conv1_pre.assign(s1.out_size(), 0.0);
        c.conv1_out.assign(s1.out_size(), 0.0);
        nk::conv2d_forward(s1, obs, layout.view(params, "conv1.w"),
                           layout.view(params, "conv1.b"), c.conv1_pre.data(),
                           c.conv1_out.data());
        c.conv2_pre.assign(s2.out_size(), 0.0);
        c.conv2_out.assign(s2.out_size(), 0.0);
        nk::conv2d_forward(s2, c.conv1_out.data(), layout.view(params, "conv2.w"),
                           layout.view(params, "conv2.b"), c.conv2_pre.data(),
                           c.conv2_out.data());
        c.conv3_pre.assign(s3.out_size(), 0.0);
        c.conv3_out.assign(s3.out_size(), 0.0);
        nk::conv2d_forward(s3, c.conv2_out.data(), layout.view(params, "conv3.w"),
                           layout.view(params, "conv3.b"), c.conv3_pre.data(),
                           c.conv3_out.data());
        encoded = c.conv3_out.data();
        encoded_len = static_cast<int>(s3.out_size());
    } else {
        const FcSpec enc = flat_enc_spec(cfg);
        c.flat_pre.assign(enc.out, 0.0);
        c.flat_out.assign(enc.out, 0.0);
        nk::fc_forward(enc, obs, layout.view(params, "enc.w"),
                       layout.view(params, "enc.b"), c.flat_pre.data(),
                       c.flat_out.data());
        encoded = c.flat_out.data();
        encoded_len = enc.out;
    }

    // Trunk input: encoded features + one-hot(last action) + one-hot(slot).
    const int trunk_len = cfg.trunk_in();
    c.trunk_in.assign(trunk_len, 0.0);
    std::memcpy(c.trunk_in.data(), encoded, encoded_len * sizeof(double));
    const int action_index = last_action + 1;
    if (action_index < 0 || action_index >= cfg.actions) {
        throw ContractViolation("agent_forward: bad last_action");
    }
    c.trunk_in[encoded_len + action_index] = 1.0;
    c.trunk_in[encoded_len + cfg.actions + agent_slot] = 1.0;

    const FcSpec fc1{trunk_len, cfg.fc1_units, true};
    c.fc1_pre.assign(fc1.out, 0.0);
    c.fc1_out.assign(fc1.out, 0.0);
    nk::fc_forward(fc1, c.trunk_in.data(), layout.view(params, "fc1.w"),
                   layout.view(params, "fc1.b"), c.fc1_pre.data(),
                   c.fc1_out.data());

    const GruSpec gru{cfg.fc1_units, cfg.gru_hidden};
    GruWeights gw{layout.view(params, "gru.wz"), layout.view(params, "gru.uz"),
                  layout.view(params, "gru.bz"), layout.view(params, "gru.wr"),
                  layout.view(params, "gru.ur"), layout.view(params, "gru.br"),
                  layout.view(params, "gru.wc"), layout.view(params, "gru.uc"),
                  layout.view(params, "gru.bc")};
    c.h_next.assign(cfg.gru_hidden, 0.0);
    nk::gru_forward(gru, c.fc1_out.data(), c.h_prev.data(), gw, c.gru,
                    c.h_next.data());

    const FcSpec fc2{cfg.gru_hidden, cfg.fc2_units, true};
    c.fc2_pre.assign(fc2.out, 0.0);
    c.fc2_out.assign(fc2.out, 0.0);
    nk::fc_forward(fc2, c.h_next.data(), layout.view(params, "fc2.w"),
                   layout.view(params, "fc2.b"), c.fc2_pre.data(),
                   c.fc2_out.data());

    const FcSpec head{cfg.fc2_units, cfg.actions, false};
    c.head_pre.assign(head.out, 0.0);
    nk::fc_forward(head, c.fc2_out.data(), layout.view(params, "head.w"),
                   layout.view(params, "head.b"), c.head_pre.data(), q);

    std::memcpy(h_next, c.h_next.data(), cfg.gru_hidden * sizeof(double));
}

void agent_backward(const AgentNetConfig& cfg, const ParamLayout& layout,
                    const ParamVector& params, const AgentCache& c,
                    const double* gq, const double* gh_next,
                    ParamVector& grads, double* gh_prev) {
    const int trunk_len = static_cast<int>(c.trunk_in.size());

    std::vector<double> g_fc2_out(cfg.fc2_units, 0.0);
    const FcSpec head{cfg.fc2_units, cfg.actions, false};
    nk::fc_backward(head, c.fc2_out.data(), layout.view(params, "head.w"),
                    c.head_pre.data(), gq, layout.view(grads, "head.w"),
                    layout.view(grads, "head.b"), g_fc2_out.data());

    std::vector<double> g_h_next(cfg.gru_hidden, 0.0);
    if (gh_next) {
        std::memcpy(g_h_next.data(), gh_next, cfg.gru_hidden * sizeof(double));
    }
    const FcSpec fc2{cfg.gru_hidden, cfg.fc2_units, true};
    nk::fc_backward(fc2, c.h_next.data(), layout.view(params, "fc2.w"),
                    c.fc2_pre.data(), g_fc2_out.data(),
                    layout.view(grads, "fc2.w"), layout.view(grads, "fc2.b"),
                    g_h_next.data());

    const GruSpec gru{cfg.fc1_units, cfg.gru_hidden};
    GruWeights gw{layout.view(params, "gru.wz"), layout.view(params, "gru.uz"),
                  layout.view(params, "gru.bz"), layout.view(params, "gru.wr"),
                  layout.view(params, "gru.ur"), layout.view(params, "gru.br"),
                  layout.view(params, "gru.wc"), layout.view(params, "gru.uc"),
                  layout.view(params, "gru.bc")};
    GruGrads gg{layout.view(grads, "gru.wz"), layout.view(grads, "gru.uz"),
                layout.view(grads, "gru.bz"), layout.view(grads, "gru.wr"),
                layout.view(grads, "gru.ur"), layout.view(grads, "gru.br"),
                layout.view(grads, "gru.wc"), layout.view(grads, "gru.uc"),
                layout.view(grads, "gru.bc")};
    std::vector<double> g_fc1_out(cfg.fc1_units, 0.0);
    nk::gru_backward(gru, c.fc1_out.data(), c.h_prev.data(), gw, c.gru,
                     g_h_next.data(), gg, g_fc1_out.data(), gh_prev);

    std::vector<double> g_trunk(trunk_len, 0.0);
    const FcSpec fc1{trunk_len, cfg.fc1_units, true};
    nk::fc_backward(fc1, c.trunk_in.data(), layout.view(params, "fc1.w"),
                    c.fc1_pre.data(), g_fc1_out.data(),
                    layout.view(grads, "fc1.w"), layout.view(grads, "fc1.b"),
                    g_trunk.data());

    if (cfg.encoder == EncoderKind::Conv) {
        const auto s1 = cfg.conv1();
        const auto s2 = cfg.conv2();
        const auto s3 = cfg.conv3();
        std::vector<double> g_conv2(s2.out_size(), 0.0);
        nk::conv2d_backward(s3, c.conv2_out.data(), layout.view(params, "conv3.w"),
                            c.conv3_pre.data(), g_trunk.data(),
                            layout.view(grads, "conv3.w"),
                            layout.view(grads, "conv3.b"), g_conv2.data());
        std::vector<double> g_conv1(s1.out_size(), 0.0);
        nk::conv2d_backward(s2, c.conv1_out.data(), layout.view(params, "conv2.w"),
                            c.conv2_pre.data(), g_conv2.data(),
                            layout.view(grads, "conv2.w"),
                            layout.view(grads, "conv2.b"), g_conv1.data());
        nk::conv2d_backward(s1, c.obs.data(), layout.view(params, "conv1.w"),
                            c.conv1_pre.data(), g_conv1.data(),
                            layout.view(grads, "conv1.w"),
                            layout.view(grads, "conv1.b"), nullptr);
    } else {
        const FcSpec enc = flat_enc_spec(cfg);
        nk::fc_backward(enc, c.obs.data(), layout.view(params, "enc.w"),
                        c.flat_pre.data(), g_trunk.data(),
                        layout.view(grads, "enc.w"), layout.view(grads, "enc.b"),
                        nullptr);
    }
}

}  // namespace psim::rl
