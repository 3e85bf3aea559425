#include "platoonsim/control/longitudinal.hpp"

#include <algorithm>
#include <cmath>

#include "platoonsim/common/errors.hpp"

namespace psim {

double idm_accel(double v, double delta_s, double delta_v, const IdmParams& p) {
    if (!(delta_s > 0.0)) {
        throw ContractViolation("idm_accel: delta_s must be > 0");
    }
    double accel;
    if (std::isinf(delta_s)) {
        accel = p.a0 * (1.0 - std::pow(v / p.v0, p.delta));
    } else {
        const double s_star =
            p.s0 + std::max(0.0, p.T * v + v * delta_v / (2.0 * std::sqrt(p.a0 * p.b0)));
        const double ratio = s_star / delta_s;
        accel = p.a0 * (1.0 - std::pow(v / p.v0, p.delta) - ratio * ratio);
    }
    return std::clamp(accel, -2.0 * p.b0, p.a0);
}

double acc_command(double gap, double v, double v_lead, const AccParams& p) {
    const double e = gap - p.desired_gap(v);
    const double e_dot = v_lead - v;
    return std::clamp(p.k_p * e + p.k_d * e_dot, p.u_min, p.u_max);
}

double cacc_command(double gap, double v, double v_lead, double a_lead,
                    const AccParams& p, CaccFilter& filter, double dt) {
    const double e = gap - p.desired_gap(v);
    const double e_dot = v_lead - v;
    const double ff = filter.step(a_lead, p, dt);
    return std::clamp(p.k_p * e + p.k_d * e_dot + ff, p.u_min, p.u_max);
}

LongitudinalMode select_longitudinal_mode(
    const VehicleState& ego, const std::optional<NeighborInfo>& predecessor,
    VehicleKind predecessor_kind, double sensing_range) {
    if (!ego.is_cav()) return LongitudinalMode::IDM;
    if (!predecessor.has_value() || predecessor->gap > sensing_range) {
        return LongitudinalMode::FreeFlow;
    }
    return predecessor_kind == VehicleKind::CAV ? LongitudinalMode::CACC
                                                : LongitudinalMode::ACC;
}

double free_flow_command(double v, double v_desired, const AccParams& p) {
    return std::clamp(p.k_p * (v_desired - v), p.u_min, p.u_max);
}

}  // namespace psim
