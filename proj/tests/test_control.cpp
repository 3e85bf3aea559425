#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "platoonsim/common/errors.hpp"
#include "platoonsim/common/random.hpp"
#include "platoonsim/control/longitudinal.hpp"

using namespace psim;

TEST_CASE("idm free-flow equilibrium at the desired speed") {
    IdmParams p;
    CHECK(idm_accel(p.v0, kFreeFlowGap, 0.0, p) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("idm standstill equilibrium at the standstill gap") {
    IdmParams p;
    CHECK(idm_accel(0.0, p.s0, 0.0, p) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("idm worked value from the published parameters") {
    IdmParams p;
    // Independent scalar evaluation: s* = 6 + 1.02*10 = 16.2,
    // a = 1.52 (1 - (10/15.4)^4 - (16.2/30)^2).
    const double s_star = p.s0 + p.T * 10.0;
    const double oracle =
        p.a0 * (1.0 - std::pow(10.0 / p.v0, p.delta) -
                (s_star / 30.0) * (s_star / 30.0));
    CHECK(idm_accel(10.0, 30.0, 0.0, p) == doctest::Approx(oracle).epsilon(1e-12));
    CHECK(idm_accel(10.0, 30.0, 0.0, p) == doctest::Approx(0.806).epsilon(1e-3));
}

TEST_CASE("idm rejects nonpositive gaps") {
    IdmParams p;
    CHECK_THROWS_AS(idm_accel(10.0, 0.0, 0.0, p), ContractViolation);
    CHECK_THROWS_AS(idm_accel(10.0, -3.0, 0.0, p), ContractViolation);
}

TEST_CASE("idm output is clamped to [-2 b0, a0]") {
    IdmParams p;
    RandomStream rng(9);
    for (int i = 0; i < 500; ++i) {
        const double v = rng.next_double(0.0, 25.0);
        const double gap = rng.next_double(0.2, 120.0);
        const double dv = rng.next_double(-10.0, 10.0);
        const double a = idm_accel(v, gap, dv, p);
        CHECK(a <= p.a0 + 1e-12);
        CHECK(a >= -2.0 * p.b0 - 1e-12);
    }
}

TEST_CASE("idm monotonicity in speed and gap") {
    IdmParams p;
    RandomStream rng(10);
    for (int i = 0; i < 300; ++i) {
        const double v = rng.next_double(0.5, 20.0);
        const double gap = rng.next_double(5.0, 100.0);
        const double dv = rng.next_double(-5.0, 5.0);
        // Nonincreasing in v.
        CHECK(idm_accel(v + 0.5, gap, dv, p) <= idm_accel(v, gap, dv, p) + 1e-12);
        // Nondecreasing in gap.
        CHECK(idm_accel(v, gap + 1.0, dv, p) >= idm_accel(v, gap, dv, p) - 1e-12);
    }
}

TEST_CASE("acc equilibrium and worked values") {
    AccParams p;  // k_p 0.5, k_d 0.3, t_hw 1.2, s0 6
    CHECK(acc_command(p.desired_gap(10.0), 10.0, 10.0, p) == 0.0);
    // h_d = 1.2*10 + 6 = 18; gap 20 -> e = 2 -> u = +1.0.
    CHECK(acc_command(20.0, 10.0, 10.0, p) == doctest::Approx(1.0).epsilon(1e-12));
    // Derivative term alone: v_lead = v + 1 -> u = 0.3.
    CHECK(acc_command(p.desired_gap(10.0), 10.0, 11.0, p) ==
          doctest::Approx(0.3).epsilon(1e-12));
}

TEST_CASE("acc output respects the actuator clamp") {
    AccParams p;
    CHECK(acc_command(1000.0, 10.0, 10.0, p) == p.u_max);
    CHECK(acc_command(0.0, 30.0, 0.0, p) == p.u_min);
}

TEST_CASE("cacc full equilibrium is exactly zero") {
    AccParams p;
    p.t_hw = 0.6;
    p.ff_T = 0.6;
    CaccFilter filter;
    CHECK(cacc_command(p.desired_gap(12.0), 12.0, 12.0, 0.0, p, filter, 0.1) == 0.0);
}

TEST_CASE("cacc feed-forward responds positively to a lead acceleration step") {
    AccParams p;
    p.t_hw = 0.6;
    p.ff_T = 0.6;
    CaccFilter filter;
    filter.step(0.0, p, 0.1);
    CHECK(filter.step(1.0, p, 0.1) > 0.0);
}

TEST_CASE("cacc feed-forward converges to the steady-state gain") {
    AccParams p;
    p.t_hw = 0.6;
    p.ff_T = 0.6;
    p.ff_tau = 0.4;
    const double c = 0.8;
    CaccFilter filter;
    double y = 0.0;
    for (int k = 0; k < 2000; ++k) y = filter.step(c, p, 0.1);  // long horizon
    CHECK(y == doctest::Approx(p.ff_tau / p.ff_T * c).epsilon(1e-9));
}

TEST_CASE("cacc feed-forward decays to zero at rest") {
    AccParams p;
    p.t_hw = 0.6;
    p.ff_T = 0.6;
    CaccFilter filter;
    filter.step(2.0, p, 0.1);
    double y = 1.0;
    for (int k = 0; k < 1000; ++k) y = filter.step(0.0, p, 0.1);
    CHECK(std::abs(y) < 1e-12);
}

TEST_CASE("mode selection follows the connectivity logic") {
    VehicleState cav;
    cav.kind = VehicleKind::CAV;
    VehicleState human;
    human.kind = VehicleKind::HumanDriven;

    const NeighborInfo pred{1, 30.0, 0.0};
    CHECK(select_longitudinal_mode(cav, pred, VehicleKind::CAV, 100.0) ==
          LongitudinalMode::CACC);
    CHECK(select_longitudinal_mode(cav, pred, VehicleKind::HumanDriven, 100.0) ==
          LongitudinalMode::ACC);
    CHECK(select_longitudinal_mode(cav, std::nullopt, VehicleKind::CAV, 100.0) ==
          LongitudinalMode::FreeFlow);
    const NeighborInfo far{1, 150.0, 0.0};
    CHECK(select_longitudinal_mode(cav, far, VehicleKind::CAV, 100.0) ==
          LongitudinalMode::FreeFlow);
    CHECK(select_longitudinal_mode(human, pred, VehicleKind::CAV, 100.0) ==
          LongitudinalMode::IDM);
}

TEST_CASE("engagement rule gap scales with speed") {
    EngagementRule rule;  // 0.6 s headway, 6 m standstill, factor 2
    CHECK(rule.max_gap(10.0) == doctest::Approx(24.0));
    CHECK(rule.max_gap(0.0) == doctest::Approx(12.0));
}
