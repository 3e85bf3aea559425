#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "platoonsim/common/errors.hpp"
#include "platoonsim/common/random.hpp"
#include "platoonsim/exec/lane_change.hpp"
#include "platoonsim/exec/mpc.hpp"
#include "platoonsim/exec/quintic.hpp"
#include "platoonsim/sim/world.hpp"

using namespace psim;

TEST_CASE("lateral quintic with zero boundary rates is the min-jerk profile") {
    PlanStart start{0.0, 0.0, 15.0, 0.0, 0.0};
    PlanGoal goal{3.5, 15.0};
    const TrajectoryPlan plan = plan_quintic(start, goal, 3.0);
    CHECK(plan.y(1.5) == doctest::Approx(0.5 * 3.5).epsilon(1e-12));
    // Oracle: independent solve of the 6x6 boundary system via the closed form.
    for (int k = 0; k <= 10; ++k) {
        const double s = k / 10.0;
        const double closed = 3.5 * (10 * s * s * s - 15 * s * s * s * s +
                                     6 * s * s * s * s * s);
        CHECK(plan.y(3.0 * s) == doctest::Approx(closed).epsilon(1e-10));
    }
}

TEST_CASE("zero lateral goal with zero rates gives identically zero lateral coefficients") {
    PlanStart start{10.0, 0.0, 12.0, 0.0, 0.0};
    PlanGoal goal{0.0, 12.0};
    const TrajectoryPlan plan = plan_quintic(start, goal, 2.0);
    for (double b : plan.b) CHECK(b == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("plan boundary residuals vanish on random problems") {
    RandomStream rng(21);
    for (int i = 0; i < 200; ++i) {
        PlanStart start{rng.next_double(0, 1000), rng.next_double(0, 10),
                        rng.next_double(0, 20), rng.next_double(-3, 2),
                        rng.next_double(-0.05, 0.05)};
        PlanGoal goal{rng.next_double(0, 10), rng.next_double(0, 20)};
        const double t_f = rng.next_double(1.0, 5.0);
        const TrajectoryPlan plan = plan_quintic(start, goal, t_f);
        CHECK(std::abs(plan.y(0.0) - start.y) < 1e-9);
        CHECK(std::abs(plan.y(t_f) - goal.y_f) < 1e-9);
        CHECK(std::abs(plan.y_dot(t_f)) < 1e-9);
        CHECK(std::abs(plan.y_ddot(t_f)) < 1e-9);
        CHECK(std::abs(plan.x_dot(t_f) - goal.v_f) < 1e-9);
        CHECK(std::abs(plan.x_ddot(t_f)) < 1e-9);
    }
}

TEST_CASE("plan_quintic rejects a zero duration") {
    CHECK_THROWS_AS(plan_quintic(PlanStart{}, PlanGoal{}, 0.0), ContractViolation);
}

TEST_CASE("select_tf with a single candidate returns it") {
    PlanStart start{0, 0, 15, 0, 0};
    PlanGoal goal{3.5, 15};
    CHECK(select_tf(start, goal, PlannerCostWeights{}, {2.5}) == 2.5);
}

TEST_CASE("degenerate no-op plan ties break to the smallest duration") {
    PlanStart start{0, 0, 15, 0, 0};
    PlanGoal goal{0.0, 15.0};  // all candidate costs are exactly zero
    CHECK(select_tf(start, goal, PlannerCostWeights{}, {4.0, 2.0, 3.0}) == 2.0);
}

TEST_CASE("pure jerk cost favors the longest duration") {
    // Oracle: jerk energy of the min-jerk profile is 720 y_f^2 / t_f^5, so
    // the cost-minimizing candidate is the largest t_f.
    PlanStart start{0, 0, 15, 0, 0};
    PlanGoal goal{3.5, 15.0};
    PlannerCostWeights w{0.0, 1.0, 0.0};
    CHECK(select_tf(start, goal, w, {2.0, 3.0, 4.0}) == 4.0);
    for (double t_f : {2.0, 3.0, 4.0}) {
        const TrajectoryPlan plan = plan_quintic(start, goal, t_f);
        const double oracle = 720.0 * 3.5 * 3.5 / std::pow(t_f, 5);
        CHECK(plan_cost(plan, goal.y_f, w) ==
              doctest::Approx(oracle).epsilon(1e-6));
    }
}

TEST_CASE("select_tf is permutation invariant") {
    PlanStart start{0, 0, 14, 0.3, 0.01};
    PlanGoal goal{3.5, 14.5};
    PlannerCostWeights w;
    const double a = select_tf(start, goal, w, {2.0, 3.0, 4.0});
    const double b = select_tf(start, goal, w, {4.0, 2.0, 3.0});
    const double c = select_tf(start, goal, w, {3.0, 4.0, 2.0});
    CHECK(a == b);
    CHECK(b == c);
}

TEST_CASE("linearized matrices match the published entries") {
    const LinearBicycle lb = linearize_bicycle(10.0, 0.4, 1.5, 0.1);
    CHECK(lb.a_cont(1, 2) == doctest::Approx(10.0));      // y' = v0 theta
    CHECK(lb.a_cont(0, 3) == doctest::Approx(1.0));       // x' = v
    CHECK(lb.a_cont(4, 4) == doctest::Approx(-1.0 / 0.4));
    CHECK(lb.b_cont(4, 0) == doctest::Approx(1.0 / 0.4)); // B(5,1) = 1/tau
    CHECK(lb.b_cont(1, 1) == doctest::Approx(5.0));       // 0.5 v0
    CHECK(lb.b_cont(2, 1) == doctest::Approx(10.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("discretized zero-input zero-state stays zero") {
    const LinearBicycle lb = linearize_bicycle(12.0, 0.4, 1.5, 0.1);
    Eigen::Matrix<double, 5, 1> x = Eigen::Matrix<double, 5, 1>::Zero();
    for (int k = 0; k < 50; ++k) x = lb.a_disc * x;
    CHECK(x.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("discretization matches dense substepped integration") {
    const LinearBicycle lb = linearize_bicycle(15.0, 0.4, 1.5, 0.1);
    // Oracle: 1000 Euler substeps of the continuous system under held input.
    Eigen::Matrix<double, 5, 1> x;
    x << 1.0, 0.5, 0.01, 14.0, 0.2;
    Eigen::Vector2d u(0.6, 0.02);
    Eigen::Matrix<double, 5, 1> fine = x;
    const int sub = 20000;
    const double h = 0.1 / sub;
    for (int i = 0; i < sub; ++i) {
        fine += h * (lb.a_cont * fine + lb.b_cont * u);
    }
    const Eigen::Matrix<double, 5, 1> coarse = lb.a_disc * x + lb.b_disc * u;
    CHECK((coarse - fine).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("one-step box constraint clamps exactly at the bound") {
    MpcConfig cfg;
    cfg.horizon = 1;
    cfg.kkt_tol = 1e-10;
    const LinearBicycle lb = linearize_bicycle(15.0, 0.4, 1.5, 0.1);
    Eigen::Matrix<double, 5, 1> x0 = Eigen::Matrix<double, 5, 1>::Zero();
    x0(3) = 15.0;
    // Demand a huge jump in x: the unconstrained optimum exceeds ua_max.
    std::vector<Eigen::Vector2d> ref{Eigen::Vector2d(1000.0, 0.0)};
    const MpcSolution sol = mpc_step(x0, ref, lb, cfg, ControlInput{});
    CHECK(sol.u.u_a == doctest::Approx(cfg.ua_max));
}

TEST_CASE("mpc rejects a short reference") {
    MpcConfig cfg;
    const LinearBicycle lb = linearize_bicycle(15.0, 0.4, 1.5, 0.1);
    Eigen::Matrix<double, 5, 1> x0 = Eigen::Matrix<double, 5, 1>::Zero();
    std::vector<Eigen::Vector2d> ref(cfg.horizon - 1, Eigen::Vector2d::Zero());
    CHECK_THROWS_AS(mpc_step(x0, ref, lb, cfg, ControlInput{}), ContractViolation);
}

TEST_CASE("mpc inputs stay within bounds on random instances") {
    MpcConfig cfg;
    const LinearBicycle lb = linearize_bicycle(13.0, 0.4, 1.5, 0.1);
    RandomStream rng(17);
    for (int trial = 0; trial < 20; ++trial) {
        Eigen::Matrix<double, 5, 1> x0;
        x0 << 0.0, rng.next_double(-2, 2), rng.next_double(-0.1, 0.1),
            rng.next_double(5, 20), rng.next_double(-1, 1);
        std::vector<Eigen::Vector2d> ref(cfg.horizon);
        for (int k = 0; k < cfg.horizon; ++k) {
            ref[k] = Eigen::Vector2d(rng.next_double(-5, 40),
                                     rng.next_double(-4, 4));
        }
        const MpcSolution sol = mpc_step(x0, ref, lb, cfg, ControlInput{});
        CHECK(sol.u.u_a >= cfg.ua_min - 1e-12);
        CHECK(sol.u.u_a <= cfg.ua_max + 1e-12);
        CHECK(sol.u.u_delta >= cfg.udelta_min - 1e-12);
        CHECK(sol.u.u_delta <= cfg.udelta_max + 1e-12);
    }
}

TEST_CASE("abort re-plans toward the origin lane on a predicted overlap") {
    // A same-speed vehicle rides alongside in the target lane, so the ego's
    // planned path encroaches on it mid-maneuver and the abort must fire
    // before the lateral crossing happens.
    WorldState world;
    world.road = RoadConfig{};
    world.bicycle = BicycleParams{};
    VehicleState ego;
    ego.id = 0;
    ego.kind = VehicleKind::CAV;
    ego.x = 100.0;
    ego.y = world.road.lane_center(0);
    ego.lane = 0;
    ego.v = 15.0;
    VehicleState blocker = ego;
    blocker.id = 1;
    blocker.x = 103.0;  // permanent longitudinal overlap at matched speed
    blocker.y = world.road.lane_center(1);
    blocker.lane = 1;
    world.vehicles = {ego, blocker};

    ManeuverConfig cfg;
    cfg.mpc.dt = world.road.dt;
    ManeuverTracker tracker(world, world.vehicles[0], 1, cfg);
    CHECK(tracker.target_lane() == 1);

    bool fired = false;
    for (int k = 0; k < 60 && !tracker.done(); ++k) {
        if (tracker.check_abort(world, world.vehicles[0], cfg)) {
            fired = true;
            break;
        }
        std::map<int, ControlInput> controls{
            {0, tracker.control(world, world.vehicles[0], cfg)},
            {1, ControlInput{0.0, 0.0}}};
        world = step_world(world, controls, world.road.dt);
        tracker.advance(world.road.dt);
    }
    CHECK(fired);
    CHECK(tracker.aborted());
    CHECK(tracker.target_lane() == 0);  // reference reverts to the origin lane
    // The ego never crossed into the occupied lane band.
    CHECK(world.vehicles[0].y <
          world.road.lane_center(1) - 0.5 * world.road.lane_width);
    // Abort fires at most once.
    CHECK_FALSE(tracker.check_abort(world, world.vehicles[0], cfg));
}
