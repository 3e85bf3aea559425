#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "platoonsim/common/errors.hpp"
#include "platoonsim/common/random.hpp"
#include "platoonsim/nk/adam.hpp"
#include "platoonsim/nk/checkpoint.hpp"
#include "platoonsim/nk/gradcheck.hpp"
#include "platoonsim/nk/layers.hpp"
#include "platoonsim/nk/params.hpp"

using namespace psim;
using namespace psim::nk;

TEST_CASE("conv output shapes follow the ceil rule across the published stack") {
    // Layer 1 on the study grid.
    Conv2dSpec l1{3, 3, 20, 16, 3, 3, 2, 2, true};
    CHECK(l1.out_h() == 2);
    CHECK(l1.out_w() == 10);
    Conv2dSpec l2{16, l1.out_h(), l1.out_w(), 32, 3, 3, 2, 2, true};
    CHECK(l2.out_h() == 1);
    CHECK(l2.out_w() == 5);
    Conv2dSpec l3{32, l2.out_h(), l2.out_w(), 16, 2, 2, 1, 2, true};
    CHECK(l3.out_h() == 1);
    CHECK(l3.out_w() == 3);
}

TEST_CASE("delta kernel reproduces the channel sum") {
    // Single filter, 1x1 patch of ones, stride 1, no activation: the output
    // equals the sum over input channels.
    Conv2dSpec spec{2, 3, 4, 1, 1, 1, 1, 1, false};
    std::vector<double> in(2 * 3 * 4);
    RandomStream rng(1);
    for (auto& x : in) x = rng.next_double(-1.0, 1.0);
    std::vector<double> w{1.0, 1.0};  // one filter, both channels
    std::vector<double> b{0.0};
    std::vector<double> pre(spec.out_size()), out(spec.out_size());
    conv2d_forward(spec, in.data(), w.data(), b.data(), pre.data(), out.data());
    for (int y = 0; y < 3; ++y) {
        for (int x = 0; x < 4; ++x) {
            CHECK(out[y * 4 + x] ==
                  doctest::Approx(in[y * 4 + x] + in[12 + y * 4 + x]));
        }
    }
}

TEST_CASE("all-zero weights and bias give all-zero conv output") {
    Conv2dSpec spec{3, 3, 20, 16, 3, 3, 2, 2, true};
    std::vector<double> in(3 * 3 * 20, 0.5);
    std::vector<double> w(spec.weight_size(), 0.0), b(16, 0.0);
    std::vector<double> pre(spec.out_size()), out(spec.out_size());
    conv2d_forward(spec, in.data(), w.data(), b.data(), pre.data(), out.data());
    for (double v : out) CHECK(v == 0.0);
}

TEST_CASE("gru with zero parameters halves the hidden state") {
    GruSpec spec{4, 3};
    std::vector<double> zeros(3 * 4 + 3 * 3 + 3, 0.0);
    GruWeights w{zeros.data(), zeros.data() + 12, zeros.data() + 21,
                 zeros.data(), zeros.data() + 12, zeros.data() + 21,
                 zeros.data(), zeros.data() + 12, zeros.data() + 21};
    std::vector<double> x{0.3, -0.2, 0.9, 0.1};
    std::vector<double> h{0.4, -0.6, 0.2};
    std::vector<double> h_next(3);
    GruCache cache;
    gru_forward(spec, x.data(), h.data(), w, cache, h_next.data());
    for (int k = 0; k < 3; ++k) {
        CHECK(cache.z[k] == doctest::Approx(0.5));
        CHECK(h_next[k] == doctest::Approx(0.5 * h[k]).epsilon(1e-12));
    }
    // All-zero input and state map to zero.
    std::vector<double> x0(4, 0.0), h0(3, 0.0), hn(3);
    gru_forward(spec, x0.data(), h0.data(), w, cache, hn.data());
    for (double v : hn) CHECK(v == 0.0);
}

TEST_CASE("gru hidden state stays inside (-1, 1)") {
    GruSpec spec{5, 4};
    ParamLayout layout;
    layout.add("wz", {4, 5}, 5);
    layout.add("uz", {4, 4}, 4);
    layout.add("bz", {4}, 0);
    layout.add("wr", {4, 5}, 5);
    layout.add("ur", {4, 4}, 4);
    layout.add("br", {4}, 0);
    layout.add("wc", {4, 5}, 5);
    layout.add("uc", {4, 4}, 4);
    layout.add("bc", {4}, 0);
    RandomStream rng(2);
    ParamVector params = init_params(layout, rng);
    // Inflate the weights to stress the bound.
    for (auto& p : params) p *= 10.0;
    GruWeights w{layout.view(params, "wz"), layout.view(params, "uz"),
                 layout.view(params, "bz"), layout.view(params, "wr"),
                 layout.view(params, "ur"), layout.view(params, "br"),
                 layout.view(params, "wc"), layout.view(params, "uc"),
                 layout.view(params, "bc")};
    std::vector<double> h(4, 0.0), h_next(4);
    GruCache cache;
    for (int t = 0; t < 200; ++t) {
        std::vector<double> x(5);
        for (auto& v : x) v = rng.next_double(-3.0, 3.0);
        gru_forward(spec, x.data(), h.data(), w, cache, h_next.data());
        h = h_next;
        for (double v : h) {
            CHECK(v > -1.0);
            CHECK(v < 1.0);
        }
    }
}

TEST_CASE("adam: zero gradient leaves parameters unchanged") {
    ParamVector params{0.5, -0.2, 1.0};
    ParamVector grads{0.0, 0.0, 0.0};
    AdamState state(3, 1e-3);
    optimizer_step(params, grads, state);
    CHECK(params[0] == 0.5);
    CHECK(params[1] == -0.2);
    CHECK(params[2] == 1.0);
}

TEST_CASE("adam: constant gradient moves parameters against its sign") {
    ParamVector params{0.0, 0.0};
    AdamState state(2, 1e-3);
    for (int t = 0; t < 50; ++t) {
        ParamVector grads{2.0, -0.3};
        optimizer_step(params, grads, state);
    }
    CHECK(params[0] < 0.0);
    CHECK(params[1] > 0.0);
}

TEST_CASE("adam is deterministic from identical state") {
    ParamVector pa{0.1, 0.2}, pb{0.1, 0.2};
    AdamState sa(2, 1e-3), sb(2, 1e-3);
    for (int t = 0; t < 10; ++t) {
        ParamVector g{std::sin(t + 1.0), std::cos(t + 1.0)};
        optimizer_step(pa, g, sa);
        optimizer_step(pb, g, sb);
    }
    CHECK(pa[0] == pb[0]);
    CHECK(pa[1] == pb[1]);
}

TEST_CASE("adam rejects non-finite gradients") {
    ParamVector params{0.1};
    ParamVector grads{std::numeric_limits<double>::infinity()};
    AdamState state(1, 1e-3);
    CHECK_THROWS_AS(optimizer_step(params, grads, state), TrainingError);
}

TEST_CASE("checkpoints round-trip bit-exactly") {
    ParamLayout layout;
    layout.add("w", {4, 3}, 3);
    layout.add("b", {4}, 0);
    RandomStream rng(11);
    ParamVector values = init_params(layout, rng);
    values[2] = 0.1 + 0.2;  // representative non-round double

    CheckpointFile file;
    file.kind = "unit-test";
    file.meta_json = "{\"k\":1}";
    file.groups.push_back({"g", {layout, values}});
    const std::string path =
        (std::filesystem::temp_directory_path() / "psim_ckpt_test.bin").string();
    save_checkpoint(path, file);
    const CheckpointFile loaded = load_checkpoint(path);
    std::filesystem::remove(path);

    REQUIRE(loaded.groups.size() == 1);
    CHECK(loaded.kind == "unit-test");
    CHECK(loaded.meta_json == file.meta_json);
    const auto& group = loaded.groups[0].second;
    REQUIRE(group.values.size() == values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        CHECK(group.values[i] == values[i]);  // bit-exact
    }
    CHECK(group.layout.spec("w").shape == std::vector<int>{4, 3});
}

TEST_CASE("load_checkpoint rejects garbage") {
    const std::string path =
        (std::filesystem::temp_directory_path() / "psim_bad_ckpt.bin").string();
    {
        std::FILE* f = std::fopen(path.c_str(), "wb");
        std::fputs("not a checkpoint", f);
        std::fclose(f);
    }
    CHECK_THROWS_AS(load_checkpoint(path), ConfigError);
    std::filesystem::remove(path);
}

TEST_CASE("grad_check validates an exact linear gradient") {
    // f(p) = sum p_i * c_i has gradient c.
    std::vector<double> c{0.5, -1.5, 2.0, 0.25};
    ParamVector params{0.1, 0.2, 0.3, 0.4};
    ParamVector analytic = c;
    auto loss = [&](const ParamVector& p) {
        double s = 0.0;
        for (std::size_t i = 0; i < p.size(); ++i) s += p[i] * c[i];
        return s;
    };
    CHECK(grad_check(loss, params, analytic, 1e-3) < 1e-10);
    // And flags a wrong gradient.
    analytic[1] += 0.5;
    CHECK(grad_check(loss, params, analytic, 1e-3) > 1e-2);
}

TEST_CASE("forward determinism: identical params and input give identical output") {
    Conv2dSpec spec{3, 3, 20, 16, 3, 3, 2, 2, true};
    ParamLayout layout;
    layout.add("w", {16, 3, 3, 3}, 27);
    layout.add("b", {16}, 0);
    RandomStream rng(4);
    ParamVector params = init_params(layout, rng);
    std::vector<double> in(3 * 3 * 20);
    for (auto& x : in) x = rng.next_double(0.0, 1.0);
    std::vector<double> pre1(spec.out_size()), out1(spec.out_size());
    std::vector<double> pre2(spec.out_size()), out2(spec.out_size());
    conv2d_forward(spec, in.data(), layout.view(params, "w"),
                   layout.view(params, "b"), pre1.data(), out1.data());
    conv2d_forward(spec, in.data(), layout.view(params, "w"),
                   layout.view(params, "b"), pre2.data(), out2.data());
    for (std::size_t i = 0; i < out1.size(); ++i) CHECK(out1[i] == out2[i]);
}
