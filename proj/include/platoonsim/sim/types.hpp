#pragma once

#include <cstdint>
#include <optional>
#include <vector>

namespace psim {

struct RoadConfig {
    int lane_count = 3;
    double segment_length = 1200.0;  // [m]
    double lane_width = 3.5;         // [m]
    double dt = 0.1;                 // simulation step [s]

    // Centers at (lane + 0.5) * lane_width, lane 0 is the rightmost.
    double lane_center(int lane) const { return (lane + 0.5) * lane_width; }

    // Nearest-center lane attribution; mid-maneuver vehicles belong to the
    // lane whose band contains y.
    int lane_of(double y) const {
        int lane = static_cast<int>(y / lane_width);
        if (lane < 0) lane = 0;
        if (lane >= lane_count) lane = lane_count - 1;
        return lane;
    }
};

enum class VehicleKind : int { HumanDriven = 1, CAV = 2 };

// Grid type-channel encoding: 0 = empty cell, 1 = human, 2 = CAV.
inline int grid_code(VehicleKind k) { return static_cast<int>(k); }

struct BicycleParams {
    double tau = 0.4;  // commanded-to-realized acceleration lag [s]
    double l_f = 1.5;  // mass center to front axle [m]
    double l_r = 1.5;  // mass center to rear axle [m]
};

struct ControlInput {
    double u_a = 0.0;      // commanded acceleration [m/s^2]
    double u_delta = 0.0;  // steering angle [rad]
};

enum class LcPhase : int { Keeping = 0, Executing = 1 };

struct VehicleState {
    int id = 0;
    VehicleKind kind = VehicleKind::HumanDriven;
    double x = 0.0;      // longitudinal position, global frame [m]
    double y = 0.0;      // lateral position, global frame [m]
    double theta = 0.0;  // heading [rad]
    double v = 0.0;      // forward speed [m/s], >= 0
    double a = 0.0;      // realized acceleration [m/s^2]
    int lane = 0;
    double length = 5.0;  // [m]
    bool exited = false;

    LcPhase lc_phase = LcPhase::Keeping;
    double lc_elapsed = 0.0;        // time into the active maneuver [s]
    double last_lc_time = -1.0e9;   // start time of the most recent maneuver [s]

    double front_bumper() const { return x + 0.5 * length; }
    double rear_bumper() const { return x - 0.5 * length; }
    bool is_cav() const { return kind == VehicleKind::CAV; }
};

struct ScenarioConfig {
    RoadConfig road;
    BicycleParams bicycle;
    int vehicle_count = 24;
    double mpr = 0.5;                    // CAV market penetration rate
    double spawn_min = 100.0;            // [m]
    double spawn_max = 300.0;            // [m]
    std::uint64_t seed = 0;
    double desired_speed_hv = 15.4;      // [m/s]
    double desired_speed_cav = 15.4;     // [m/s]
    double min_spawn_gap = 6.0;          // bumper-to-bumper [m], = IDM s0
    double vehicle_length = 5.0;         // [m]

    int cav_count() const {
        return static_cast<int>(mpr * vehicle_count + 0.5);
    }
};

struct NeighborInfo {
    int id = 0;
    double gap = 0.0;      // bumper-to-bumper [m]
    double delta_v = 0.0;  // ego speed minus neighbor speed [m/s]
};

// Nearest predecessor/follower in one lane of interest.
struct Neighborhood {
    std::optional<NeighborInfo> predecessor;
    std::optional<NeighborInfo> follower;
};

}  // namespace psim
