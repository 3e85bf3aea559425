#pragma once

#include <array>
#include <vector>

namespace psim {

// Quintic coefficient pairs for x(t), y(t) plus the maneuver duration.
struct TrajectoryPlan {
    std::array<double, 6> a{};  // longitudinal, a0 + a1 t + ... + a5 t^5
    std::array<double, 6> b{};  // lateral
    double t_f = 0.0;

    double x(double t) const { return eval(a, t, 0); }
    double y(double t) const { return eval(b, t, 0); }
    double x_dot(double t) const { return eval(a, t, 1); }
    double y_dot(double t) const { return eval(b, t, 1); }
    double x_ddot(double t) const { return eval(a, t, 2); }
    double y_ddot(double t) const { return eval(b, t, 2); }
    double x_jerk(double t) const { return eval(a, t, 3); }
    double y_jerk(double t) const { return eval(b, t, 3); }

    static double eval(const std::array<double, 6>& c, double t, int deriv);
};

struct PlanStart {
    double x = 0.0;
    double y = 0.0;
    double v = 0.0;        // forward speed [m/s]
    double a = 0.0;        // realized acceleration [m/s^2]
    double heading = 0.0;  // [rad]
};

struct PlanGoal {
    double y_f = 0.0;  // final lateral position [m]
    double v_f = 0.0;  // final longitudinal speed [m/s]
};

struct PlannerCostWeights {
    double c1 = 1.0;   // acceleration
    double c2 = 1.0;   // jerk
    double c3 = 0.1;   // lateral deviation from y_f
};

// Solves the two 6x6 boundary-value systems. Initial position/velocity/
// acceleration match the start per axis; at t_f the longitudinal axis meets
// (v_f, zero acceleration) with final position x0 + (x_dot(0)+v_f)/2 * t_f,
// and the lateral axis meets (y_f, zero velocity, zero acceleration).
// Throws on t_f <= 0 (singular system).
TrajectoryPlan plan_quintic(const PlanStart& start, const PlanGoal& goal,
                            double t_f);

// Composite-Simpson quadrature of c1*a^2 + c2*J^2 + c3*(y - y_f)^2 over
// [0, t_f]; acceleration and jerk take both axes. intervals must be even.
double plan_cost(const TrajectoryPlan& plan, double y_f,
                 const PlannerCostWeights& w, int intervals = 100);

// Plans each candidate duration and returns the cost-minimizing t_f;
// ties take the smaller duration.
double select_tf(const PlanStart& start, const PlanGoal& goal,
                 const PlannerCostWeights& w,
                 const std::vector<double>& candidates);

}  // namespace psim
