#pragma once

#include <string>
#include <vector>

#include "platoonsim/common/parallel.hpp"

namespace psim {

struct CheckResult {
    std::string name;
    bool passed = false;
    double value = 0.0;   // measured quantity (max error, residual, ...)
    double budget = 0.0;  // allowed bound
};

struct SuiteResult {
    std::string suite;
    std::vector<CheckResult> checks;
    double seconds = 0.0;

    bool passed() const {
        for (const auto& c : checks)
            if (!c.passed) return false;
        return true;
    }
};

// Analytic-vs-finite-difference gradients: every layer, the full agent
// network, the mixing network off the abs kink, and end-to-end TD loss on a
// two-agent toy batch. All bounds are 1e-4 relative (eps = 1e-3) except the
// exact linear/quadratic case at 1e-10.
SuiteResult verify_gradients(const ExecPolicy& exec = ExecPolicy::omp());

// Monotone mixing over 1000 random (state, Q, mask) draws plus exact mask
// invariance.
SuiteResult verify_mixing(const ExecPolicy& exec = ExecPolicy::omp());

// Quintic planner conformance: min-jerk lateral profile and boundary
// residuals on 1000 random problems.
SuiteResult verify_planner();

// MPC conformance: unconstrained normal-equations match, zero-residual
// reference, closed-loop lane-change tracking bounds, box feasibility,
// monotone solver cost.
SuiteResult verify_mpc();

// Longitudinal suite: IDM equilibria, 10-vehicle platoon settling, ACC/CACC
// equilibrium, CACC filter linearity.
SuiteResult verify_longitudinal();

void print_suite(const SuiteResult& result);

}  // namespace psim
