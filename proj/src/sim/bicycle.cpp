#include "platoonsim/sim/bicycle.hpp"

#include <cmath>

#include "platoonsim/common/errors.hpp"

namespace psim {

namespace {

struct Deriv {
    double dx, dy, dv, da, dtheta;
};

Deriv rhs(double /*x*/, double /*y*/, double theta, double v, double a,
          double u_a, double beta, const BicycleParams& p) {
    Deriv d;
    d.dx = v * std::cos(theta + beta);
    d.dy = v * std::sin(theta + beta);
    d.dv = a;
    d.da = (u_a - a) / p.tau;
    d.dtheta = (v / p.l_r) * std::sin(beta);
    return d;
}

}  // namespace

double slip_angle(double u_delta, const BicycleParams& p) {
    return std::atan(p.l_r / (p.l_r + p.l_f) * std::tan(u_delta));
}

VehicleState integrate_bicycle(const VehicleState& s, const ControlInput& u,
                               const BicycleParams& p, double dt) {
    if (!(std::isfinite(s.x) && std::isfinite(s.y) && std::isfinite(s.theta) &&
          std::isfinite(s.v) && std::isfinite(s.a) && std::isfinite(u.u_a) &&
          std::isfinite(u.u_delta))) {
        throw ContractViolation("integrate_bicycle: non-finite state or input");
    }
    if (!(dt > 0.0)) {
        throw ContractViolation("integrate_bicycle: dt must be > 0");
    }

    const double beta = slip_angle(u.u_delta, p);

    const Deriv k1 = rhs(s.x, s.y, s.theta, s.v, s.a, u.u_a, beta, p);
    const Deriv k2 = rhs(s.x + 0.5 * dt * k1.dx, s.y + 0.5 * dt * k1.dy,
                         s.theta + 0.5 * dt * k1.dtheta, s.v + 0.5 * dt * k1.dv,
                         s.a + 0.5 * dt * k1.da, u.u_a, beta, p);
    const Deriv k3 = rhs(s.x + 0.5 * dt * k2.dx, s.y + 0.5 * dt * k2.dy,
                         s.theta + 0.5 * dt * k2.dtheta, s.v + 0.5 * dt * k2.dv,
                         s.a + 0.5 * dt * k2.da, u.u_a, beta, p);
    const Deriv k4 = rhs(s.x + dt * k3.dx, s.y + dt * k3.dy,
                         s.theta + dt * k3.dtheta, s.v + dt * k3.dv,
                         s.a + dt * k3.da, u.u_a, beta, p);

    VehicleState out = s;
    out.x = s.x + dt / 6.0 * (k1.dx + 2.0 * k2.dx + 2.0 * k3.dx + k4.dx);
    out.y = s.y + dt / 6.0 * (k1.dy + 2.0 * k2.dy + 2.0 * k3.dy + k4.dy);
    out.theta =
        s.theta + dt / 6.0 * (k1.dtheta + 2.0 * k2.dtheta + 2.0 * k3.dtheta + k4.dtheta);
    out.v = s.v + dt / 6.0 * (k1.dv + 2.0 * k2.dv + 2.0 * k3.dv + k4.dv);
    out.a = s.a + dt / 6.0 * (k1.da + 2.0 * k2.da + 2.0 * k3.da + k4.da);
    if (out.v < 0.0) out.v = 0.0;
    return out;
}

}  // namespace psim
