#pragma once

#include <optional>
#include <utility>

#include "platoonsim/control/longitudinal.hpp"
#include "platoonsim/sim/world.hpp"

namespace psim {

struct MobilParams {
    double politeness = 0.10;      // p
    double delta_a_t = 0.20;       // incentive threshold [m/s^2]
    double b_s = 0.80;             // safe admissible braking [m/s^2]
    double a_b = 0.20;             // right-lane bias [m/s^2]
    double delta_t_l = 8.0;        // lane-change cooldown [s]
};

// Lane-change direction. Action encoding: +1 left, 0 keep, -1 right; the
// action value equals the lane-index delta (lane 0 is rightmost).
enum class LcDir : int { Right = -1, Left = +1 };

// Longitudinal models used to predict accelerations in hypothetical
// configurations: IDM for humans, the ACC feedback law for CAVs (CACC
// headway when the predecessor is connected, no feed-forward term).
struct AccelModels {
    IdmParams idm;
    AccParams acc;
    AccParams cacc;
    double sensing_range = 100.0;  // [m]
};

// Acceleration `follower` would command with `pred` as its immediate
// predecessor (nullptr = free flow). Non-positive insertion gaps predict a
// hard brake well below any -b_s bound.
double predict_accel(const WorldState& world, const VehicleState& follower,
                     const VehicleState* pred, const AccelModels& models);

// Predicted accelerations around one hypothetical lane change.
struct MobilContext {
    double time_since_last_lc = 1.0e9;   // t - t_l [s]
    bool insertion_gaps_positive = true;

    double ego_now = 0.0;    // a: ego in its current lane
    double ego_after = 0.0;  // a': ego behind the target-lane predecessor

    bool has_old_follower = false;
    double old_follower_now = 0.0;    // a_r
    double old_follower_after = 0.0;  // a'_r (ego's old predecessor inherited)

    bool has_new_follower = false;
    double new_follower_now = 0.0;    // a_r'
    double new_follower_after = 0.0;  // a'_r' (ego inserted ahead)
};

MobilContext build_mobil_context(const WorldState& world, int ego_id, LcDir dir,
                                 const AccelModels& models);

// Eq. 12b safety (new follower decel above -b_s) plus the Eq. 12c cooldown.
// Vacuously safe without a new follower; non-positive insertion gaps fail.
bool mobil_safety(const MobilContext& ctx, const MobilParams& p);

// Incentive = (a' - a) + p * [(a'_r - a_r) + (a'_r' - a_r')]; feasible iff
// incentive > delta_a_t. Utility adds the right-lane bias for rightward
// moves. Safety must already have passed.
std::pair<bool, double> mobil_incentive(const MobilContext& ctx, LcDir dir,
                                        const MobilParams& p);

// Full MOBIL decision over {left, keep, right}: keep has utility 0; the
// safe+feasible direction with maximal utility wins; ties keep > right > left.
int mobil_decide(const WorldState& world, int ego_id, const MobilParams& p,
                 const AccelModels& models);

}  // namespace psim
