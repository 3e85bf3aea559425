#pragma once

#include <functional>

#include "platoonsim/common/parallel.hpp"
#include "platoonsim/nk/params.hpp"

namespace psim::nk {

// Central-difference check of an analytic gradient: perturbs every parameter
// by +-eps, compares (f+ - f-)/(2 eps) against analytic_grad and returns the
// maximum relative error with denominator max(|analytic|, |numeric|, 1e-8).
// loss must be a pure function of the parameter vector.
double grad_check(const std::function<double(const ParamVector&)>& loss,
                  const ParamVector& params, const ParamVector& analytic_grad,
                  double eps, const ExecPolicy& exec = ExecPolicy::omp());

}  // namespace psim::nk
