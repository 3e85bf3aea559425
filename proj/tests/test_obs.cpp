#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "platoonsim/common/errors.hpp"
#include "platoonsim/common/random.hpp"
#include "platoonsim/obs/grid.hpp"
#include "platoonsim/obs/metrics.hpp"
#include "platoonsim/obs/platoon.hpp"
#include "platoonsim/obs/reward.hpp"

using namespace psim;

namespace {

VehicleState vehicle(int id, double x, double v, int lane,
                     VehicleKind kind = VehicleKind::HumanDriven) {
    VehicleState s;
    s.id = id;
    s.kind = kind;
    s.x = x;
    s.v = v;
    s.lane = lane;
    s.y = RoadConfig{}.lane_center(lane);
    return s;
}

WorldState world_of(std::vector<VehicleState> vehicles) {
    WorldState w;
    w.road = RoadConfig{};
    w.bicycle = BicycleParams{};
    w.vehicles = std::move(vehicles);
    return w;
}

}  // namespace

TEST_CASE("worked grid shapes") {
    SUBCASE("two lanes, 100 m over 10 m cells") {
        GridConfig cfg;
        cfg.lanes = 2;
        cfg.l_tail = 0.0;
        cfg.l_head = 100.0;
        CHECK(cfg.cells() == 10);
        WorldState w = world_of({vehicle(0, 500.0, 10.0, 0)});
        const GridObservation obs = encode_grid(w, 0, cfg);
        CHECK(obs.channels == 3);
        CHECK(obs.lanes == 2);
        CHECK(obs.cells == 10);
        CHECK(obs.data.size() == 3u * 2u * 10u);
    }
    SUBCASE("study configuration") {
        GridConfig cfg;  // 100 + 100 over 10, 3 lanes
        CHECK(cfg.cells() == 20);
        WorldState w = world_of({vehicle(0, 500.0, 10.0, 0)});
        const GridObservation obs = encode_grid(w, 0, cfg);
        CHECK(obs.lanes == 3);
        CHECK(obs.cells == 20);
    }
}

TEST_CASE("lone ego occupies exactly one cell with type code 2") {
    GridConfig cfg;
    WorldState w = world_of({vehicle(0, 503.0, 12.0, 1, VehicleKind::CAV)});
    const GridObservation obs = encode_grid(w, 0, cfg);
    int nonzero_type = 0;
    for (int lane = 0; lane < obs.lanes; ++lane) {
        for (int cell = 0; cell < obs.cells; ++cell) {
            if (obs.at(2, lane, cell) != 0.0) {
                ++nonzero_type;
                CHECK(obs.at(2, lane, cell) == 2.0);
                CHECK(lane == 1);
                CHECK(cell == 10);  // ego sits at the l_tail boundary cell
                // The window is ego-centered, so the ego lands at the start
                // of its own cell.
                CHECK(obs.at(0, lane, cell) == doctest::Approx(0.0));
                CHECK(obs.at(1, lane, cell) == doctest::Approx(12.0 / cfg.v_max));
            }
        }
    }
    CHECK(nonzero_type == 1);
}

TEST_CASE("out-of-range vehicles are omitted and shape is invariant") {
    GridConfig cfg;
    RandomStream rng(3);
    for (int trial = 0; trial < 30; ++trial) {
        std::vector<VehicleState> vs{vehicle(0, 600.0, 12.0, 1)};
        const int extras = rng.next_int(0, 20);
        for (int i = 0; i < extras; ++i) {
            vs.push_back(vehicle(1 + i, rng.next_double(0.0, 1200.0), 10.0,
                                 rng.next_int(0, 2)));
        }
        WorldState w = world_of(std::move(vs));
        const GridObservation obs = encode_grid(w, 0, cfg);
        CHECK(obs.data.size() == 3u * 3u * 20u);  // shape never varies
        int occupied = 0;
        for (int lane = 0; lane < obs.lanes; ++lane) {
            for (int cell = 0; cell < obs.cells; ++cell) {
                if (obs.at(2, lane, cell) != 0.0) ++occupied;
            }
        }
        int in_range = 0;
        for (const auto& v : w.vehicles) {
            if (v.x >= 500.0 && v.x < 700.0) ++in_range;
        }
        CHECK(occupied <= in_range);
    }
}

TEST_CASE("shared cells resolve to the vehicle nearer the ego") {
    GridConfig cfg;
    WorldState w = world_of({vehicle(0, 500.0, 12.0, 1),
                             vehicle(1, 533.0, 9.0, 1),
                             vehicle(2, 537.0, 7.0, 1, VehicleKind::CAV)});
    const GridObservation obs = encode_grid(w, 0, cfg);
    // Both occupy cell floor((53x-400)/10) = 13; vehicle 1 is nearer.
    CHECK(obs.at(2, 1, 13) == 1.0);
    CHECK(obs.at(1, 1, 13) == doctest::Approx(9.0 / cfg.v_max));
}

TEST_CASE("global state covers the whole segment") {
    GridConfig cfg;
    WorldState w = world_of({vehicle(0, 5.0, 10.0, 0),
                             vehicle(1, 1195.0, 10.0, 2, VehicleKind::CAV)});
    const GridObservation obs = encode_global_state(w, cfg);
    CHECK(obs.cells == 120);
    CHECK(obs.at(2, 0, 0) == 1.0);
    CHECK(obs.at(2, 2, 119) == 2.0);
}

TEST_CASE("safety reward worked values") {
    RewardConfig cfg;  // r_decay 0.1, h_min 6
    CHECK(reward_safety(6.0, std::nullopt, cfg) == doctest::Approx(1.0));
    CHECK(reward_safety(16.0, 26.0, cfg) ==
          doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
    CHECK(reward_safety(std::nullopt, std::nullopt, cfg) == 1.0);
}

TEST_CASE("speed reward worked values") {
    RewardConfig cfg;  // m_decay 0.2
    CHECK(reward_speed(12.0, 12.0, cfg) == 1.0);
    CHECK(reward_speed(17.0, 12.0, cfg) ==
          doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
}

TEST_CASE("platoon reward worked values") {
    CHECK(reward_platoon(0) == 0.0);
    CHECK(reward_platoon(1) == doctest::Approx(std::log10(2.0)).epsilon(1e-12));
    CHECK(reward_platoon(5) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("combined reward worked values") {
    RewardConfig cfg;  // w = (1, 0.5, 2)
    CHECK(combined_reward(0.3, 0.5, 0.9, true, cfg) == -5.0);
    CHECK(combined_reward(0.0, 1.0, 1.0, false, cfg) ==
          doctest::Approx(2.5).epsilon(1e-12));
    CHECK(combined_reward(0.0, 0.0, 0.0, false, cfg) == 0.0);
}

TEST_CASE("reward bounds and monotonicity") {
    RewardConfig cfg;
    RandomStream rng(8);
    for (int i = 0; i < 300; ++i) {
        const double gf = rng.next_double(0.0, 150.0);
        const double gr = rng.next_double(0.0, 150.0);
        const double rd = reward_safety(gf, gr, cfg);
        CHECK(rd > 0.0);
        CHECK(rd <= 1.0);
        const double rv = reward_speed(rng.next_double(0, 30), rng.next_double(0, 30), cfg);
        CHECK(rv > 0.0);
        CHECK(rv <= 1.0);
        const double rc = reward_platoon(rng.next_int(0, 23));
        CHECK(rc >= 0.0);
        CHECK(rc <= std::log10(2.0 * 23.0) + 1e-12);
        // Monotone in each component.
        const double base = combined_reward(rc, rv, rd, false, cfg);
        CHECK(combined_reward(rc + 0.1, rv, rd, false, cfg) >= base);
        CHECK(combined_reward(rc, rv + 0.01, rd, false, cfg) >= base);
        CHECK(combined_reward(rc, rv, rd + 0.01, false, cfg) >= base);
    }
}

TEST_CASE("count_connected_ahead walks CAV chains") {
    EngagementRule rule{0.0, 20.0, 2.0};  // constant 40 m threshold
    SUBCASE("human predecessor stops the count") {
        WorldState w = world_of({vehicle(0, 100.0, 10.0, 0, VehicleKind::CAV),
                                 vehicle(1, 130.0, 10.0, 0)});
        CHECK(count_connected_ahead(w, 0, rule) == 0);
    }
    SUBCASE("chain of two with moderate gaps") {
        WorldState w = world_of({vehicle(0, 100.0, 10.0, 0, VehicleKind::CAV),
                                 vehicle(1, 120.0, 10.0, 0, VehicleKind::CAV),
                                 vehicle(2, 140.0, 10.0, 0, VehicleKind::CAV)});
        CHECK(count_connected_ahead(w, 0, rule) == 2);
    }
    SUBCASE("oversize gap stops the count") {
        WorldState w = world_of({vehicle(0, 100.0, 10.0, 0, VehicleKind::CAV),
                                 vehicle(1, 165.0, 10.0, 0, VehicleKind::CAV)});
        CHECK(count_connected_ahead(w, 0, rule) == 0);
    }
    SUBCASE("other lanes are invisible to the walk") {
        WorldState w = world_of({vehicle(0, 100.0, 10.0, 0, VehicleKind::CAV),
                                 vehicle(1, 120.0, 10.0, 0, VehicleKind::CAV),
                                 vehicle(2, 118.0, 10.0, 1),
                                 vehicle(3, 125.0, 10.0, 2, VehicleKind::CAV)});
        CHECK(count_connected_ahead(w, 0, rule) == 1);
    }
}

TEST_CASE("platoon chains split at humans and oversize gaps") {
    EngagementRule rule{0.0, 20.0, 2.0};
    WorldState w = world_of({vehicle(0, 100.0, 10.0, 0, VehicleKind::CAV),
                             vehicle(1, 120.0, 10.0, 0, VehicleKind::CAV),
                             vehicle(2, 150.0, 10.0, 0),
                             vehicle(3, 180.0, 10.0, 0, VehicleKind::CAV),
                             vehicle(4, 300.0, 10.0, 0, VehicleKind::CAV)});
    const auto chains = platoon_chains(w, rule);
    REQUIRE(chains.size() == 3);
    CHECK(chains[0] == std::vector<int>{1, 0});
    CHECK(chains[1] == std::vector<int>{3});
    CHECK(chains[2] == std::vector<int>{4});
}

TEST_CASE("platoon metrics reduce an episode trace") {
    EpisodeTrace trace;
    trace.vehicle_count = 4;
    trace.kinds = {VehicleKind::CAV, VehicleKind::CAV, VehicleKind::CAV,
                   VehicleKind::HumanDriven};
    trace.abs_accel_integral = {0.0, 0.0, 0.0, 0.0};
    trace.lane_changes = {2, 1, 0, 1};
    trace.dt = 0.1;

    TickRecord t0;
    t0.time = 0.0;
    t0.present = {1, 1, 1, 1};
    t0.engaged = {0, 0, 0, 0};
    t0.max_chain = 1;
    TickRecord t1;
    t1.time = 5.0;
    t1.present = {1, 1, 1, 1};
    t1.engaged = {1, 0, 0, 0};
    t1.max_chain = 2;
    TickRecord t2;
    t2.time = 10.0;
    t2.present = {1, 1, 1, 1};
    t2.engaged = {1, 1, 0, 0};
    t2.max_chain = 3;
    trace.ticks = {t0, t1, t2};

    const EpisodeMetrics m = platoon_metrics(trace);
    CHECK(m.platoon_rate == doctest::Approx(2.0 / 3.0));
    CHECK(m.max_platoon_length == 3.0);
    CHECK(m.formation_time == doctest::Approx((5.0 + 10.0) / 2.0));
    CHECK(m.lane_changes_per_vehicle == doctest::Approx(1.0));
    CHECK(m.energy == 0.0);  // constant zero acceleration
}

TEST_CASE("platoon rate handles zero engagement and empty traces") {
    EpisodeTrace trace;
    trace.vehicle_count = 3;
    trace.kinds = {VehicleKind::CAV, VehicleKind::CAV, VehicleKind::CAV};
    trace.abs_accel_integral = {0, 0, 0};
    trace.lane_changes = {0, 0, 0};
    TickRecord t0;
    t0.present = {1, 1, 1};
    t0.engaged = {0, 0, 0};
    trace.ticks = {t0};
    const EpisodeMetrics m = platoon_metrics(trace);
    CHECK(m.platoon_rate == 0.0);
    CHECK(std::isnan(m.formation_time));

    EpisodeTrace empty;
    CHECK_THROWS_AS(platoon_metrics(empty), ContractViolation);
}

TEST_CASE("agent reward composes the three terms from the world") {
    RewardConfig cfg;
    EngagementRule rule;
    // Ego CAV engaged behind a CAV at the minimum safe distance, matched speed.
    WorldState w = world_of(
        {vehicle(0, 100.0, 15.4, 0, VehicleKind::CAV),
         vehicle(1, 111.0, 15.4, 0, VehicleKind::CAV)});  // gap exactly 6 m
    const double r = agent_reward(w, 0, false, cfg, rule);
    const double expected = cfg.w1 * std::log10(2.0) + cfg.w2 * 1.0 + cfg.w3 * 1.0;
    CHECK(r == doctest::Approx(expected).epsilon(1e-12));
    CHECK(agent_reward(w, 0, true, cfg, rule) == -5.0);
}
