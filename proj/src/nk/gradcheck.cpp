#include "platoonsim/nk/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "platoonsim/common/errors.hpp"

namespace psim::nk {

double grad_check(const std::function<double(const ParamVector&)>& loss,
                  const ParamVector& params, const ParamVector& analytic_grad,
                  double eps, const ExecPolicy& exec) {
    if (!(eps > 0.0)) throw ContractViolation("grad_check: eps must be > 0");
    if (params.size() != analytic_grad.size()) {
        throw ContractViolation("grad_check: gradient size mismatch");
    }
    std::vector<double> rel_error(params.size(), 0.0);
    parallel_for(exec, params.size(), [&](std::size_t i) {
        ParamVector perturbed = params;
        perturbed[i] = params[i] + eps;
        const double f_plus = loss(perturbed);
        perturbed[i] = params[i] - eps;
        const double f_minus = loss(perturbed);
        const double numeric = (f_plus - f_minus) / (2.0 * eps);
        const double analytic = analytic_grad[i];
        const double denom =
            std::max({std::abs(analytic), std::abs(numeric), 1.0e-8});
        rel_error[i] = std::abs(analytic - numeric) / denom;
    });
    double max_err = 0.0;
    for (double e : rel_error) max_err = std::max(max_err, e);
    return max_err;
}

}  // namespace psim::nk
