#include "platoonsim/exec/mpc.hpp"

#include <cmath>
#include <sstream>

#include "platoonsim/common/errors.hpp"

namespace psim {

namespace {

// Matrix exponential by scaling-and-squaring Taylor series; the arguments
// here have small norm (|A| dt entries are O(1)).
Eigen::MatrixXd expm(const Eigen::MatrixXd& m) {
    const double norm = m.cwiseAbs().rowwise().sum().maxCoeff();
    int squarings = 0;
    double scale = 1.0;
    while (norm * scale > 0.25) {
        scale *= 0.5;
        ++squarings;
    }
    const Eigen::MatrixXd a = m * scale;
    Eigen::MatrixXd result = Eigen::MatrixXd::Identity(m.rows(), m.cols());
    Eigen::MatrixXd term = result;
    for (int k = 1; k <= 16; ++k) {
        term = term * a / static_cast<double>(k);
        result += term;
    }
    for (int s = 0; s < squarings; ++s) result = result * result;
    return result;
}

}  // namespace

LinearBicycle linearize_bicycle(double v0, double tau, double l_r, double dt) {
    if (!(v0 > 0.0)) throw ContractViolation("linearize_bicycle: v0 must be > 0");
    LinearBicycle lb;
    lb.a_cont.setZero();
    lb.a_cont(0, 3) = 1.0;          // x' = v
    lb.a_cont(1, 2) = v0;           // y' = v0 * theta
    lb.a_cont(3, 4) = 1.0;          // v' = a
    lb.a_cont(4, 4) = -1.0 / tau;   // a' = (u_a - a)/tau

    lb.b_cont.setZero();
    lb.b_cont(1, 1) = 0.5 * v0;           // y' <- steering
    lb.b_cont(2, 1) = v0 / (2.0 * l_r);   // theta' <- steering
    lb.b_cont(4, 0) = 1.0 / tau;          // a' <- u_a

    // Van Loan block: expm([[A, B], [0, 0]] dt) = [[Ad, Bd], [0, I]].
    Eigen::MatrixXd block = Eigen::MatrixXd::Zero(7, 7);
    block.topLeftCorner<5, 5>() = lb.a_cont;
    block.topRightCorner<5, 2>() = lb.b_cont;
    const Eigen::MatrixXd e = expm(block * dt);
    lb.a_disc = e.topLeftCorner<5, 5>();
    lb.b_disc = e.topRightCorner<5, 2>();

    lb.c_out.setZero();
    lb.c_out(0, 0) = 1.0;
    lb.c_out(1, 1) = 1.0;
    return lb;
}

MpcSolution mpc_step(const Eigen::Matrix<double, 5, 1>& state,
                     const std::vector<Eigen::Vector2d>& reference,
                     const LinearBicycle& model, const MpcConfig& cfg,
                     const ControlInput& u_prev) {
    const int n = cfg.horizon;
    if (static_cast<int>(reference.size()) < n) {
        throw ContractViolation("mpc_step: reference shorter than horizon");
    }
    const int dim = 2 * n;

    // Prediction matrices: Y = F x0 + G U, Y stacking C X_1 .. C X_N.
    Eigen::MatrixXd f_mat(dim, 5);
    Eigen::MatrixXd g_mat = Eigen::MatrixXd::Zero(dim, dim);
    {
        std::vector<Eigen::Matrix<double, 2, 2>> cab(n);  // C A^j B
        Eigen::Matrix<double, 5, 2> ab = model.b_disc;
        for (int j = 0; j < n; ++j) {
            cab[j] = model.c_out * ab;
            ab = model.a_disc * ab;
        }
        Eigen::Matrix<double, 5, 5> a_acc = model.a_disc;
        for (int k = 0; k < n; ++k) {
            f_mat.block<2, 5>(2 * k, 0) = model.c_out * a_acc;
            a_acc = model.a_disc * a_acc;
            for (int j = 0; j <= k; ++j) {
                g_mat.block<2, 2>(2 * k, 2 * j) = cab[k - j];
            }
        }
    }

    Eigen::VectorXd q_diag(dim), r_diag(dim);
    for (int k = 0; k < n; ++k) {
        q_diag(2 * k) = cfg.q_x;
        q_diag(2 * k + 1) = cfg.q_y;
        r_diag(2 * k) = cfg.r_ua;
        r_diag(2 * k + 1) = cfg.r_udelta;
    }

    // Difference operator: (D U)_k = u_k - u_{k-1}, u_{-1} folded into e.
    Eigen::MatrixXd d_mat = Eigen::MatrixXd::Identity(dim, dim);
    for (int k = 1; k < n; ++k) {
        d_mat(2 * k, 2 * (k - 1)) = -1.0;
        d_mat(2 * k + 1, 2 * (k - 1) + 1) = -1.0;
    }
    Eigen::VectorXd e_vec = Eigen::VectorXd::Zero(dim);
    e_vec(0) = u_prev.u_a;
    e_vec(1) = u_prev.u_delta;

    Eigen::VectorXd ref(dim);
    for (int k = 0; k < n; ++k) ref.segment<2>(2 * k) = reference[k];

    const Eigen::VectorXd y_free = f_mat * state;
    // f(U) = (y_free + G U - ref)^T Q (..) + (D U - e)^T R (D U - e)
    //      = 1/2 U^T H U + q^T U + const.
    const Eigen::MatrixXd hess =
        2.0 * (g_mat.transpose() * q_diag.asDiagonal() * g_mat +
               d_mat.transpose() * r_diag.asDiagonal() * d_mat);
    const Eigen::VectorXd q_lin =
        2.0 * (g_mat.transpose() * (q_diag.asDiagonal() * (y_free - ref)) -
               d_mat.transpose() * (r_diag.asDiagonal() * e_vec));
    const double constant =
        (y_free - ref).dot(q_diag.asDiagonal() * (y_free - ref)) +
        e_vec.dot(r_diag.asDiagonal() * e_vec);

    auto cost = [&](const Eigen::VectorXd& u) {
        return 0.5 * u.dot(hess * u) + q_lin.dot(u) + constant;
    };

    Eigen::VectorXd lo(dim), hi(dim);
    for (int k = 0; k < n; ++k) {
        lo(2 * k) = cfg.ua_min;
        hi(2 * k) = cfg.ua_max;
        lo(2 * k + 1) = cfg.udelta_min;
        hi(2 * k + 1) = cfg.udelta_max;
    }
    auto project = [&](Eigen::VectorXd u) -> Eigen::VectorXd {
        return u.cwiseMax(lo).cwiseMin(hi);
    };

    // Active-set projected Newton on the box-constrained condensed QP:
    // clamp, split free/clamped from the gradient sign at the bounds, take a
    // Newton step on the free block with a backtracking projected line
    // search. The condensed Hessian is far too ill-conditioned for plain
    // first-order projected gradient (steering-to-position columns grow like
    // k^2), so descent iterations here are Newton steps; the cost decreases
    // monotonically and the KKT residual reaches machine precision.
    Eigen::VectorXd u = project(e_vec);
    for (int k = 1; k < n; ++k) u.segment<2>(2 * k) = u.segment<2>(0);
    double f_u = cost(u);

    MpcSolution sol;
    if (cfg.record_cost_trace) sol.cost_trace.push_back(f_u);

    auto kkt_residual = [&](const Eigen::VectorXd& point,
                            const Eigen::VectorXd& gradient) {
        return (point - project(point - gradient)).cwiseAbs().maxCoeff();
    };

    bool converged = false;
    bool at_numerical_optimum = false;
    int iter = 0;
    double residual = 0.0;
    for (; iter < cfg.max_iters; ++iter) {
        const Eigen::VectorXd grad = hess * u + q_lin;
        residual = kkt_residual(u, grad);
        if (residual < cfg.kkt_tol) {
            converged = true;
            break;
        }

        std::vector<int> free_idx;
        free_idx.reserve(dim);
        const double edge = 1e-12;
        for (int i = 0; i < dim; ++i) {
            const bool at_lo = u(i) <= lo(i) + edge && grad(i) > 0.0;
            const bool at_hi = u(i) >= hi(i) - edge && grad(i) < 0.0;
            if (!at_lo && !at_hi) free_idx.push_back(i);
        }
        if (free_idx.empty()) {  // all bound-clamped and optimal there
            converged = residual < cfg.kkt_tol;
            break;
        }

        const int nf = static_cast<int>(free_idx.size());
        Eigen::MatrixXd h_ff(nf, nf);
        Eigen::VectorXd g_f(nf);
        for (int r = 0; r < nf; ++r) {
            g_f(r) = grad(free_idx[r]);
            for (int c = 0; c < nf; ++c) h_ff(r, c) = hess(free_idx[r], free_idx[c]);
        }
        const Eigen::VectorXd d_f = h_ff.llt().solve(-g_f);
        Eigen::VectorXd direction = Eigen::VectorXd::Zero(dim);
        for (int r = 0; r < nf; ++r) direction(free_idx[r]) = d_f(r);

        double alpha = 1.0;
        bool stepped = false;
        for (int ls = 0; ls < 40; ++ls) {
            const Eigen::VectorXd candidate = project(u + alpha * direction);
            const double f_candidate = cost(candidate);
            if (f_candidate < f_u) {
                u = candidate;
                f_u = f_candidate;
                stepped = true;
                break;
            }
            alpha *= 0.5;
        }
        if (!stepped) {  // no descent direction left: numerical optimum
            at_numerical_optimum = true;
            break;
        }
        if (cfg.record_cost_trace) sol.cost_trace.push_back(f_u);
    }
    {
        const Eigen::VectorXd grad = hess * u + q_lin;
        residual = kkt_residual(u, grad);
    }
    if (!converged && !at_numerical_optimum && residual >= cfg.kkt_tol) {
        std::ostringstream oss;
        oss << "mpc_step: no convergence after " << iter
            << " iterations, kkt residual " << residual << ", tol "
            << cfg.kkt_tol;
        throw ControllerError(oss.str());
    }

    sol.u = ControlInput{u(0), u(1)};
    sol.iterations = iter;
    sol.kkt_residual = residual;
    const Eigen::VectorXd y_pred = y_free + g_mat * u;
    sol.predicted.resize(n);
    for (int k = 0; k < n; ++k) sol.predicted[k] = y_pred.segment<2>(2 * k);
    return sol;
}

}  // namespace psim
