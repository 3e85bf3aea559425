#pragma once

#include <cmath>
#include <limits>
#include <optional>

#include "platoonsim/sim/types.hpp"

namespace psim {

// Intelligent Driver Model parameters (human car-following).
struct IdmParams {
    double a0 = 1.52;    // maximum acceleration [m/s^2]
    double b0 = 3.24;    // comfortable deceleration [m/s^2]
    double T = 1.02;     // desired headway [s]
    double v0 = 15.4;    // desired velocity [m/s]
    double s0 = 6.0;     // standstill gap [m]
    double delta = 4.0;  // acceleration exponent
};

// ACC/CACC gap-control parameters.
struct AccParams {
    double k_p = 0.5;      // proportional gain
    double k_d = 0.3;      // derivative gain
    double t_hw = 1.2;     // desired time headway [s]
    double s0 = 6.0;       // standstill distance [m]
    double ff_T = 0.6;     // feed-forward filter constant [s] (= CACC headway)
    double ff_tau = 0.4;   // feed-forward lag [s] (= actuator tau)
    double u_min = -4.0;   // command clamp [m/s^2]
    double u_max = 2.0;    // command clamp [m/s^2]

    double desired_gap(double v) const { return t_hw * v + s0; }
};

inline constexpr double kFreeFlowGap = std::numeric_limits<double>::infinity();

// IDM acceleration (free-flow callers pass delta_s = +inf). Output clamped
// to [-2*b0, a0]. delta_s <= 0 is a domain error: collisions are detected
// upstream.
double idm_accel(double v, double delta_s, double delta_v, const IdmParams& p);

// ACC commanded acceleration: u = k_p*(gap - h_d(v)) + k_d*(v_lead - v),
// clamped to [u_min, u_max]. Surplus gap accelerates.
double acc_command(double gap, double v, double v_lead, const AccParams& p);

// Discrete state of the CACC feed-forward filter; one per vehicle, owned by
// the simulation instance. The filter is the ZOH discretization of
// H(s) = 1 - (1 - tau/T)/(1 + T s): unit feedthrough with a first-order
// washout whose step response decays to the steady gain tau/T.
struct CaccFilter {
    double z = 0.0;  // low-pass state of the lead acceleration

    void reset() { z = 0.0; }

    // Advances the filter by dt and returns the feed-forward contribution.
    double step(double a_lead, const AccParams& p, double dt) {
        const double phi = std::exp(-dt / p.ff_T);
        z = phi * z + (1.0 - phi) * a_lead;
        return a_lead - (1.0 - p.ff_tau / p.ff_T) * z;
    }
};

// ACC feedback plus the communicated-acceleration feed-forward term.
double cacc_command(double gap, double v, double v_lead, double a_lead,
                    const AccParams& p, CaccFilter& filter, double dt);

enum class LongitudinalMode { IDM, ACC, CACC, FreeFlow };

// Fig. 2 mode logic: CAV behind a connected (CAV) predecessor in sensing
// range -> CACC; behind a human -> ACC; no predecessor in range -> FreeFlow.
// Human drivers always map to IDM.
LongitudinalMode select_longitudinal_mode(
    const VehicleState& ego, const std::optional<NeighborInfo>& predecessor,
    VehicleKind predecessor_kind, double sensing_range);

// Free-flow speed tracking for leaderless CAVs: u = k_p (v_desired - v).
double free_flow_command(double v, double v_desired, const AccParams& p);

// Gap gate for CACC engagement: a link counts as engaged while the
// bumper-to-bumper gap is at most factor * desired CACC gap at the
// follower's current speed. Used for platoon membership and metrics.
struct EngagementRule {
    double t_hw = 0.6;    // CACC headway [s]
    double s0 = 6.0;      // standstill distance [m]
    double factor = 2.0;

    double max_gap(double v_follower) const {
        return factor * (t_hw * v_follower + s0);
    }
};

}  // namespace psim
