#pragma once

#include <Eigen/Dense>
#include <vector>

#include "platoonsim/sim/types.hpp"

namespace psim {

// Receding-horizon tracker configuration. State X = (x, y, theta, v, a),
// inputs u = (u_a, u_delta), outputs Y = (x, y).
struct MpcConfig {
    int horizon = 20;          // N steps
    double dt = 0.1;           // [s]
    double q_x = 1.0;          // output deviation weights (diagonal Q)
    double q_y = 10.0;
    double r_ua = 0.1;         // input-increment weights (diagonal R)
    double r_udelta = 10.0;
    double ua_min = -4.0;      // [m/s^2]
    double ua_max = 2.0;       // [m/s^2]
    double udelta_min = -0.3;  // [rad]
    double udelta_max = 0.3;   // [rad]
    double kkt_tol = 1.0e-6;
    int max_iters = 10000;
    bool record_cost_trace = false;
};

// Continuous-time linearization around forward speed v0 and its zero-order-
// hold discretization at dt.
struct LinearBicycle {
    Eigen::Matrix<double, 5, 5> a_cont;
    Eigen::Matrix<double, 5, 2> b_cont;
    Eigen::Matrix<double, 5, 5> a_disc;
    Eigen::Matrix<double, 5, 2> b_disc;
    Eigen::Matrix<double, 2, 5> c_out;  // selects (x, y)
};

LinearBicycle linearize_bicycle(double v0, double tau, double l_r, double dt);

struct MpcSolution {
    ControlInput u;                           // first input move
    std::vector<Eigen::Vector2d> predicted;   // outputs over the horizon
    int iterations = 0;
    double kkt_residual = 0.0;
    std::vector<double> cost_trace;           // filled if record_cost_trace
};

// Solves the condensed dense QP over the absolute input sequence with box
// constraints via monotone Nesterov-accelerated projected gradient to a
// projected-gradient KKT residual below kkt_tol. The cost penalizes output
// deviation from the reference and input increments Delta u_n = u_n - u_{n-1}
// (u_{-1} = u_prev). Reference must hold at least `horizon` samples. Throws
// ControllerError if the iteration cap is hit without convergence.
MpcSolution mpc_step(const Eigen::Matrix<double, 5, 1>& state,
                     const std::vector<Eigen::Vector2d>& reference,
                     const LinearBicycle& model, const MpcConfig& cfg,
                     const ControlInput& u_prev);

}  // namespace psim
