#include "platoonsim/nk/layers.hpp"

#include <cmath>
#include <cstring>

namespace psim::nk {

namespace {
inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }
}

void conv2d_forward(const Conv2dSpec& s, const double* in, const double* w,
                    const double* b, double* preact, double* out) {
    const int oh = s.out_h(), ow = s.out_w();
    const int pt = s.pad_top(), pl = s.pad_left();
    for (int f = 0; f < s.filters; ++f) {
        const double* wf = w + static_cast<std::size_t>(f) * s.in_c * s.kh * s.kw;
        for (int y = 0; y < oh; ++y) {
            for (int x = 0; x < ow; ++x) {
                double acc = b[f];
                for (int c = 0; c < s.in_c; ++c) {
                    const double* in_c = in + static_cast<std::size_t>(c) * s.in_h * s.in_w;
                    const double* wc = wf + static_cast<std::size_t>(c) * s.kh * s.kw;
                    for (int i = 0; i < s.kh; ++i) {
                        const int iy = y * s.sh - pt + i;
                        if (iy < 0 || iy >= s.in_h) continue;
                        for (int j = 0; j < s.kw; ++j) {
                            const int ix = x * s.sw - pl + j;
                            if (ix < 0 || ix >= s.in_w) continue;
                            acc += in_c[iy * s.in_w + ix] * wc[i * s.kw + j];
                        }
                    }
                }
                const std::size_t idx =
                    (static_cast<std::size_t>(f) * oh + y) * ow + x;
                preact[idx] = acc;
                out[idx] = s.relu && acc < 0.0 ? 0.0 : acc;
            }
        }
    }
}

void conv2d_backward(const Conv2dSpec& s, const double* in, const double* w,
                     const double* preact, const double* gout, double* gw,
                     double* gb, double* gin) {
    const int oh = s.out_h(), ow = s.out_w();
    const int pt = s.pad_top(), pl = s.pad_left();
    for (int f = 0; f < s.filters; ++f) {
        const double* wf = w + static_cast<std::size_t>(f) * s.in_c * s.kh * s.kw;
        double* gwf = gw + static_cast<std::size_t>(f) * s.in_c * s.kh * s.kw;
        for (int y = 0; y < oh; ++y) {
            for (int x = 0; x < ow; ++x) {
                const std::size_t idx =
                    (static_cast<std::size_t>(f) * oh + y) * ow + x;
                double g = gout[idx];
                if (s.relu && preact[idx] <= 0.0) g = 0.0;
                if (g == 0.0) continue;
                gb[f] += g;
                for (int c = 0; c < s.in_c; ++c) {
                    const double* in_c = in + static_cast<std::size_t>(c) * s.in_h * s.in_w;
                    double* gin_c =
                        gin ? gin + static_cast<std::size_t>(c) * s.in_h * s.in_w : nullptr;
                    const double* wc = wf + static_cast<std::size_t>(c) * s.kh * s.kw;
                    double* gwc = gwf + static_cast<std::size_t>(c) * s.kh * s.kw;
                    for (int i = 0; i < s.kh; ++i) {
                        const int iy = y * s.sh - pt + i;
                        if (iy < 0 || iy >= s.in_h) continue;
                        for (int j = 0; j < s.kw; ++j) {
                            const int ix = x * s.sw - pl + j;
                            if (ix < 0 || ix >= s.in_w) continue;
                            gwc[i * s.kw + j] += g * in_c[iy * s.in_w + ix];
                            if (gin_c) gin_c[iy * s.in_w + ix] += g * wc[i * s.kw + j];
                        }
                    }
                }
            }
        }
    }
}

void fc_forward(const FcSpec& s, const double* x, const double* w,
                const double* b, double* preact, double* out) {
    for (int o = 0; o < s.out; ++o) {
        const double* wo = w + static_cast<std::size_t>(o) * s.in;
        double acc = b[o];
        for (int i = 0; i < s.in; ++i) acc += wo[i] * x[i];
        preact[o] = acc;
        out[o] = s.relu && acc < 0.0 ? 0.0 : acc;
    }
}

void fc_backward(const FcSpec& s, const double* x, const double* w,
                 const double* preact, const double* gout, double* gw,
                 double* gb, double* gx) {
    for (int o = 0; o < s.out; ++o) {
        double g = gout[o];
        if (s.relu && preact[o] <= 0.0) g = 0.0;
        if (g == 0.0) continue;
        gb[o] += g;
        const double* wo = w + static_cast<std::size_t>(o) * s.in;
        double* gwo = gw + static_cast<std::size_t>(o) * s.in;
        for (int i = 0; i < s.in; ++i) {
            gwo[i] += g * x[i];
            if (gx) gx[i] += g * wo[i];
        }
    }
}

void gru_forward(const GruSpec& s, const double* x, const double* h_prev,
                 const GruWeights& w, GruCache& cache, double* h_next) {
    const int H = s.hidden, I = s.input;
    cache.z.assign(H, 0.0);
    cache.r.assign(H, 0.0);
    cache.c.assign(H, 0.0);
    cache.rh.assign(H, 0.0);
    for (int k = 0; k < H; ++k) {
        double az = w.bz[k], ar = w.br[k];
        const double* wzk = w.wz + static_cast<std::size_t>(k) * I;
        const double* wrk = w.wr + static_cast<std::size_t>(k) * I;
        for (int i = 0; i < I; ++i) {
            az += wzk[i] * x[i];
            ar += wrk[i] * x[i];
        }
        const double* uzk = w.uz + static_cast<std::size_t>(k) * H;
        const double* urk = w.ur + static_cast<std::size_t>(k) * H;
        for (int j = 0; j < H; ++j) {
            az += uzk[j] * h_prev[j];
            ar += urk[j] * h_prev[j];
        }
        cache.z[k] = sigmoid(az);
        cache.r[k] = sigmoid(ar);
    }
    for (int j = 0; j < H; ++j) cache.rh[j] = cache.r[j] * h_prev[j];
    for (int k = 0; k < H; ++k) {
        double ac = w.bc[k];
        const double* wck = w.wc + static_cast<std::size_t>(k) * I;
        for (int i = 0; i < I; ++i) ac += wck[i] * x[i];
        const double* uck = w.uc + static_cast<std::size_t>(k) * H;
        for (int j = 0; j < H; ++j) ac += uck[j] * cache.rh[j];
        cache.c[k] = std::tanh(ac);
        h_next[k] = (1.0 - cache.z[k]) * h_prev[k] + cache.z[k] * cache.c[k];
    }
}

void gru_backward(const GruSpec& s, const double* x, const double* h_prev,
                  const GruWeights& w, const GruCache& cache,
                  const double* gh_next, const GruGrads& g, double* gx,
                  double* gh_prev) {
    const int H = s.hidden, I = s.input;
    std::vector<double> gz_pre(H), gr_pre(H), gc_pre(H), grh(H, 0.0);
    std::vector<double> gh(H, 0.0);  // into h_prev

    for (int k = 0; k < H; ++k) {
        const double ghk = gh_next[k];
        const double gzk = ghk * (cache.c[k] - h_prev[k]);
        const double gck = ghk * cache.z[k];
        gh[k] += ghk * (1.0 - cache.z[k]);
        gz_pre[k] = gzk * cache.z[k] * (1.0 - cache.z[k]);
        gc_pre[k] = gck * (1.0 - cache.c[k] * cache.c[k]);
    }
    // Candidate path: ac_k = Wc x + Uc (r h) + bc.
    for (int k = 0; k < H; ++k) {
        const double gc = gc_pre[k];
        if (gc == 0.0) continue;
        g.bc[k] += gc;
        double* gwck = g.wc + static_cast<std::size_t>(k) * I;
        const double* wck = w.wc + static_cast<std::size_t>(k) * I;
        for (int i = 0; i < I; ++i) {
            gwck[i] += gc * x[i];
            if (gx) gx[i] += gc * wck[i];
        }
        double* guck = g.uc + static_cast<std::size_t>(k) * H;
        const double* uck = w.uc + static_cast<std::size_t>(k) * H;
        for (int j = 0; j < H; ++j) {
            guck[j] += gc * cache.rh[j];
            grh[j] += gc * uck[j];
        }
    }
    for (int j = 0; j < H; ++j) {
        gr_pre[j] = grh[j] * h_prev[j] * cache.r[j] * (1.0 - cache.r[j]);
        gh[j] += grh[j] * cache.r[j];
    }
    // Gate paths.
    for (int k = 0; k < H; ++k) {
        const double gzp = gz_pre[k];
        const double grp = gr_pre[k];
        if (gzp != 0.0) {
            g.bz[k] += gzp;
            double* gwzk = g.wz + static_cast<std::size_t>(k) * I;
            const double* wzk = w.wz + static_cast<std::size_t>(k) * I;
            for (int i = 0; i < I; ++i) {
                gwzk[i] += gzp * x[i];
                if (gx) gx[i] += gzp * wzk[i];
            }
            double* guzk = g.uz + static_cast<std::size_t>(k) * H;
            const double* uzk = w.uz + static_cast<std::size_t>(k) * H;
            for (int j = 0; j < H; ++j) {
                guzk[j] += gzp * h_prev[j];
                gh[j] += gzp * uzk[j];
            }
        }
        if (grp != 0.0) {
            g.br[k] += grp;
            double* gwrk = g.wr + static_cast<std::size_t>(k) * I;
            const double* wrk = w.wr + static_cast<std::size_t>(k) * I;
            for (int i = 0; i < I; ++i) {
                gwrk[i] += grp * x[i];
                if (gx) gx[i] += grp * wrk[i];
            }
            double* gurk = g.ur + static_cast<std::size_t>(k) * H;
            const double* urk = w.ur + static_cast<std::size_t>(k) * H;
            for (int j = 0; j < H; ++j) {
                gurk[j] += grp * h_prev[j];
                gh[j] += grp * urk[j];
            }
        }
    }
    if (gh_prev) {
        for (int j = 0; j < H; ++j) gh_prev[j] += gh[j];
    }
}

double elu(double x) { return x >= 0.0 ? x : std::exp(x) - 1.0; }
double elu_deriv(double x) { return x >= 0.0 ? 1.0 : std::exp(x); }

}  // namespace psim::nk
