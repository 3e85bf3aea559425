#pragma once

#include <vector>

namespace psim::nk {

// ----- 2-D convolution (zero same-padding, ceil-division output shape) -----

struct Conv2dSpec {
    int in_c = 0, in_h = 0, in_w = 0;
    int filters = 0;
    int kh = 0, kw = 0;
    int sh = 1, sw = 1;
    bool relu = true;

    int out_h() const { return (in_h + sh - 1) / sh; }
    int out_w() const { return (in_w + sw - 1) / sw; }
    // TensorFlow-style SAME padding split (extra pixel goes to the end).
    int pad_top() const { return pad_h() / 2; }
    int pad_left() const { return pad_w() / 2; }
    int pad_h() const {
        const int p = (out_h() - 1) * sh + kh - in_h;
        return p > 0 ? p : 0;
    }
    int pad_w() const {
        const int p = (out_w() - 1) * sw + kw - in_w;
        return p > 0 ? p : 0;
    }
    std::size_t out_size() const {
        return static_cast<std::size_t>(filters) * out_h() * out_w();
    }
    std::size_t weight_size() const {
        return static_cast<std::size_t>(filters) * in_c * kh * kw;
    }
};

// preact and out may alias only if spec.relu is false.
void conv2d_forward(const Conv2dSpec& spec, const double* in, const double* w,
                    const double* b, double* preact, double* out);

// Accumulates (+=) into gw, gb, gin. gin may be nullptr for the first layer.
void conv2d_backward(const Conv2dSpec& spec, const double* in, const double* w,
                     const double* preact, const double* gout, double* gw,
                     double* gb, double* gin);

// ----- fully connected -----

struct FcSpec {
    int in = 0, out = 0;
    bool relu = false;
};

void fc_forward(const FcSpec& spec, const double* x, const double* w,
                const double* b, double* preact, double* out);
void fc_backward(const FcSpec& spec, const double* x, const double* w,
                 const double* preact, const double* gout, double* gw,
                 double* gb, double* gx);

// ----- GRU cell -----

struct GruSpec {
    int input = 0, hidden = 0;
};

// Cached activations of one step, needed by the backward pass.
struct GruCache {
    std::vector<double> z, r, c, rh;  // gates, candidate, r*h_prev
};

struct GruWeights {
    const double *wz, *uz, *bz;
    const double *wr, *ur, *br;
    const double *wc, *uc, *bc;
};
struct GruGrads {
    double *wz, *uz, *bz;
    double *wr, *ur, *br;
    double *wc, *uc, *bc;
};

// h' = (1-z) h + z tanh(Wc x + Uc (r h) + bc); z, r are sigmoid gates.
void gru_forward(const GruSpec& spec, const double* x, const double* h_prev,
                 const GruWeights& w, GruCache& cache, double* h_next);

// Accumulates parameter grads; gx and gh_prev may be nullptr when unused.
void gru_backward(const GruSpec& spec, const double* x, const double* h_prev,
                  const GruWeights& w, const GruCache& cache,
                  const double* gh_next, const GruGrads& g, double* gx,
                  double* gh_prev);

// ----- scalar activations -----

double elu(double x);
double elu_deriv(double x);

}  // namespace psim::nk
