#pragma once

#include "platoonsim/sim/types.hpp"

namespace psim {

// Slip angle beta = arctan(L_r / (L_r + L_f) * tan(u_delta)).
double slip_angle(double u_delta, const BicycleParams& p);

// One explicit RK4 step of the kinematic bicycle model with first-order
// acceleration lag:
//   x' = v cos(theta + beta)
//   y' = v sin(theta + beta)
//   v' = a
//   a' = (u_a - a) / tau
//   theta' = (v / L_r) sin(beta)
// Speed is clamped at 0 from below after the step.
VehicleState integrate_bicycle(const VehicleState& s, const ControlInput& u,
                               const BicycleParams& p, double dt);

}  // namespace psim
