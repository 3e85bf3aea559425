#include "platoonsim/exec/quintic.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <limits>

#include "platoonsim/common/errors.hpp"

namespace psim {

double TrajectoryPlan::eval(const std::array<double, 6>& c, double t, int deriv) {
    // Horner over the derivative's coefficients.
    double out = 0.0;
    for (int k = 5; k >= deriv; --k) {
        double factor = 1.0;
        for (int j = 0; j < deriv; ++j) factor *= (k - j);
        out = out * t + factor * c[k];
    }
    return out;
}

namespace {

// The three t=0 conditions pin c0..c2 directly; the remaining unknowns solve
// a 3x3 system, so a boundary problem whose residual target is exactly zero
// yields exactly zero high-order coefficients (exact cost ties in select_tf).
std::array<double, 6> solve_axis(double p0, double v0, double a0, double pf,
                                 double vf, double af, double t_f) {
    std::array<double, 6> c{};
    c[0] = p0;
    c[1] = v0;
    c[2] = 0.5 * a0;
    const double t2 = t_f * t_f, t3 = t2 * t_f, t4 = t3 * t_f, t5 = t4 * t_f;
    Eigen::Matrix3d m;
    m << t3, t4, t5,
         3.0 * t2, 4.0 * t3, 5.0 * t4,
         6.0 * t_f, 12.0 * t2, 20.0 * t3;
    Eigen::Vector3d rhs;
    rhs << pf - (c[0] + c[1] * t_f + c[2] * t2),
           vf - (c[1] + 2.0 * c[2] * t_f),
           af - 2.0 * c[2];
    const Eigen::Vector3d tail = m.fullPivLu().solve(rhs);
    c[3] = tail(0);
    c[4] = tail(1);
    c[5] = tail(2);
    return c;
}

}  // namespace

TrajectoryPlan plan_quintic(const PlanStart& start, const PlanGoal& goal,
                            double t_f) {
    if (!(t_f > 0.0)) {
        throw ContractViolation("plan_quintic: t_f must be > 0 (singular system)");
    }
    const double x_dot0 = start.v * std::cos(start.heading);
    const double y_dot0 = start.v * std::sin(start.heading);
    const double x_ddot0 = start.a * std::cos(start.heading);
    const double y_ddot0 = start.a * std::sin(start.heading);
    const double x_final = start.x + 0.5 * (x_dot0 + goal.v_f) * t_f;

    TrajectoryPlan plan;
    plan.t_f = t_f;
    plan.a = solve_axis(start.x, x_dot0, x_ddot0, x_final, goal.v_f, 0.0, t_f);
    plan.b = solve_axis(start.y, y_dot0, y_ddot0, goal.y_f, 0.0, 0.0, t_f);
    return plan;
}

double plan_cost(const TrajectoryPlan& plan, double y_f,
                 const PlannerCostWeights& w, int intervals) {
    if (intervals % 2 != 0) ++intervals;
    const double h = plan.t_f / intervals;
    auto integrand = [&](double t) {
        const double acc2 = plan.x_ddot(t) * plan.x_ddot(t) +
                            plan.y_ddot(t) * plan.y_ddot(t);
        const double jerk2 = plan.x_jerk(t) * plan.x_jerk(t) +
                             plan.y_jerk(t) * plan.y_jerk(t);
        const double dev = plan.y(t) - y_f;
        return w.c1 * acc2 + w.c2 * jerk2 + w.c3 * dev * dev;
    };
    double sum = integrand(0.0) + integrand(plan.t_f);
    for (int i = 1; i < intervals; ++i) {
        sum += (i % 2 == 1 ? 4.0 : 2.0) * integrand(i * h);
    }
    return sum * h / 3.0;
}

double select_tf(const PlanStart& start, const PlanGoal& goal,
                 const PlannerCostWeights& w,
                 const std::vector<double>& candidates) {
    if (candidates.empty()) {
        throw ContractViolation("select_tf: empty candidate set");
    }
    double best_tf = 0.0;
    double best_cost = std::numeric_limits<double>::infinity();
    for (const double t_f : candidates) {
        const TrajectoryPlan plan = plan_quintic(start, goal, t_f);
        const double cost = plan_cost(plan, goal.y_f, w);
        if (cost < best_cost || (cost == best_cost && t_f < best_tf)) {
            best_cost = cost;
            best_tf = t_f;
        }
    }
    return best_tf;
}

}  // namespace psim
