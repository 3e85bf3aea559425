#include "platoonsim/rl/mixer.hpp"

#include <cmath>

#include "platoonsim/nk/layers.hpp"

namespace psim::rl {

using nk::ParamLayout;
using nk::ParamVector;

ParamLayout build_mixer_layout(const MixerConfig& cfg) {
    ParamLayout layout;
    const int s = cfg.state_dim, h = cfg.hidden, n = cfg.n_max;
    layout.add("hw1.w", {h * n, s}, s);
    layout.add("hw1.b", {h * n}, 0);
    layout.add("hb1.w", {h, s}, s);
    layout.add("hb1.b", {h}, 0);
    layout.add("hw2.w", {h, s}, s);
    layout.add("hw2.b", {h}, 0);
    layout.add("hb2.w", {1, s}, s);
    layout.add("hb2.b", {1}, 0);
    return layout;
}

namespace {

// y = W state + b for a (rows x state_dim) hypernetwork map.
void hyper_eval(const double* w, const double* b, const double* state, int rows,
                int s, double* out) {
    for (int r = 0; r < rows; ++r) {
        const double* wr = w + static_cast<std::size_t>(r) * s;
        double acc = b[r];
        for (int i = 0; i < s; ++i) acc += wr[i] * state[i];
        out[r] = acc;
    }
}

// Accumulate hypernetwork grads given d(out_r).
void hyper_backward(const double* gout, const double* state, int rows, int s,
                    double* gw, double* gb) {
    for (int r = 0; r < rows; ++r) {
        const double g = gout[r];
        if (g == 0.0) continue;
        gb[r] += g;
        double* gwr = gw + static_cast<std::size_t>(r) * s;
        for (int i = 0; i < s; ++i) gwr[i] += g * state[i];
    }
}

}  // namespace

double mixer_forward(const MixerConfig& cfg, const ParamLayout& layout,
                     const ParamVector& params, const double* qs,
                     const std::uint8_t* mask, const double* state,
                     MixerCache* cache) {
    const int s = cfg.state_dim, h = cfg.hidden, n = cfg.n_max;
    MixerCache local;
    MixerCache& c = cache ? *cache : local;
    c.state.assign(state, state + s);
    c.mask.assign(mask, mask + n);
    c.q_masked.assign(n, 0.0);
    for (int i = 0; i < n; ++i) c.q_masked[i] = mask[i] ? qs[i] : 0.0;

    c.w1_raw.assign(static_cast<std::size_t>(h) * n, 0.0);
    hyper_eval(layout.view(params, "hw1.w"), layout.view(params, "hw1.b"), state,
               h * n, s, c.w1_raw.data());
    c.b1.assign(h, 0.0);
    hyper_eval(layout.view(params, "hb1.w"), layout.view(params, "hb1.b"), state,
               h, s, c.b1.data());
    c.w2_raw.assign(h, 0.0);
    hyper_eval(layout.view(params, "hw2.w"), layout.view(params, "hw2.b"), state,
               h, s, c.w2_raw.data());
    double b2 = 0.0;
    hyper_eval(layout.view(params, "hb2.w"), layout.view(params, "hb2.b"), state,
               1, s, &b2);

    c.hidden_pre.assign(h, 0.0);
    c.hidden_out.assign(h, 0.0);
    double q_total = b2;
    for (int k = 0; k < h; ++k) {
        double acc = c.b1[k];
        const double* w1k = c.w1_raw.data() + static_cast<std::size_t>(k) * n;
        for (int i = 0; i < n; ++i) acc += std::abs(w1k[i]) * c.q_masked[i];
        c.hidden_pre[k] = acc;
        c.hidden_out[k] = nk::elu(acc);
        q_total += std::abs(c.w2_raw[k]) * c.hidden_out[k];
    }
    return q_total;
}

void mixer_backward(const MixerConfig& cfg, const ParamLayout& layout,
                    const ParamVector& params, const MixerCache& c,
                    double g_qtotal, ParamVector& grads, double* gqs) {
    (void)params;
    const int s = cfg.state_dim, h = cfg.hidden, n = cfg.n_max;

    // Final bias.
    const double gb2 = g_qtotal;
    hyper_backward(&gb2, c.state.data(), 1, s, layout.view(grads, "hb2.w"),
                   layout.view(grads, "hb2.b"));

    std::vector<double> g_w2_raw(h, 0.0), g_hidden(h, 0.0), g_pre(h, 0.0);
    for (int k = 0; k < h; ++k) {
        const double w2k = std::abs(c.w2_raw[k]);
        g_w2_raw[k] = g_qtotal * c.hidden_out[k] *
                      (c.w2_raw[k] > 0.0 ? 1.0 : (c.w2_raw[k] < 0.0 ? -1.0 : 0.0));
        g_hidden[k] = g_qtotal * w2k;
        g_pre[k] = g_hidden[k] * nk::elu_deriv(c.hidden_pre[k]);
    }
    hyper_backward(g_w2_raw.data(), c.state.data(), h, s,
                   layout.view(grads, "hw2.w"), layout.view(grads, "hw2.b"));
    hyper_backward(g_pre.data(), c.state.data(), h, s,
                   layout.view(grads, "hb1.w"), layout.view(grads, "hb1.b"));

    std::vector<double> g_w1_raw(static_cast<std::size_t>(h) * n, 0.0);
    for (int k = 0; k < h; ++k) {
        const double* w1k = c.w1_raw.data() + static_cast<std::size_t>(k) * n;
        double* gw1k = g_w1_raw.data() + static_cast<std::size_t>(k) * n;
        for (int i = 0; i < n; ++i) {
            const double sign =
                w1k[i] > 0.0 ? 1.0 : (w1k[i] < 0.0 ? -1.0 : 0.0);
            gw1k[i] = g_pre[k] * c.q_masked[i] * sign;
        }
    }
    hyper_backward(g_w1_raw.data(), c.state.data(), h * n, s,
                   layout.view(grads, "hw1.w"), layout.view(grads, "hw1.b"));

    if (gqs) {
        for (int i = 0; i < n; ++i) {
            if (!c.mask[i]) continue;  // masked agents get no gradient
            double acc = 0.0;
            for (int k = 0; k < h; ++k) {
                acc += g_pre[k] *
                       std::abs(c.w1_raw[static_cast<std::size_t>(k) * n + i]);
            }
            gqs[i] += acc;
        }
    }
}

}  // namespace psim::rl
