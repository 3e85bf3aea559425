#pragma once

#include <vector>

#include "platoonsim/exec/mpc.hpp"
#include "platoonsim/exec/quintic.hpp"
#include "platoonsim/sim/world.hpp"

namespace psim {

struct ManeuverConfig {
    MpcConfig mpc;
    PlannerCostWeights weights;
    std::vector<double> tf_candidates{2.0, 3.0, 4.0};  // [s]
    double abort_horizon = 1.0;   // predicted-overlap lookahead [s]
    double abort_replan_tf = 2.0; // duration of the return plan [s]
    double min_linearization_speed = 1.0;  // [m/s]
};

// Tracks one lane-change maneuver: samples the quintic plan over the MPC
// horizon as reference, returns the first input move each step, and re-plans
// toward the origin lane if a collision is predicted within abort_horizon at
// current closing rates. Completion hands longitudinal control back to the
// ACC/CACC stack (handled by the caller).
class ManeuverTracker {
public:
    // Plans from the vehicle's current state; t_f chosen by select_tf.
    ManeuverTracker(const WorldState& world, const VehicleState& ego,
                    int target_lane, const ManeuverConfig& cfg);

    // Control for the current step. Throws if the plan has expired.
    ControlInput control(const WorldState& world, const VehicleState& ego,
                         const ManeuverConfig& cfg);

    // Predicted-overlap abort check; on trigger re-plans toward the origin
    // lane (once per maneuver). Returns true when the abort fired.
    bool check_abort(const WorldState& world, const VehicleState& ego,
                     const ManeuverConfig& cfg);

    void advance(double dt) { elapsed_ += dt; }
    bool done() const { return elapsed_ >= plan_.t_f - 1e-9; }

    int origin_lane() const { return origin_lane_; }
    int target_lane() const { return target_lane_; }
    bool aborted() const { return aborted_; }
    double elapsed() const { return elapsed_; }
    const TrajectoryPlan& plan() const { return plan_; }

    // Reference output (x, y) at maneuver time t; extrapolates at constant
    // final speed / final lateral position beyond t_f.
    Eigen::Vector2d reference_at(double t) const;

private:
    TrajectoryPlan plan_;
    double elapsed_ = 0.0;
    int origin_lane_ = 0;
    int target_lane_ = 0;
    bool aborted_ = false;
    ControlInput u_prev_{};
};

}  // namespace psim
