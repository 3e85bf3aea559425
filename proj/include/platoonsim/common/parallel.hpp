#pragma once

#include <cstddef>
#include <functional>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace psim {

// Execution policy for the data-parallel kernels (batch gradient
// accumulation, experiment sweeps, verification probes). The serial path is
// the reference: every parallel path writes into preallocated slots and
// reduces in fixed index order, so results are bit-identical to serial
// regardless of thread count. Tests compare the two paths byte for byte.
struct ExecPolicy {
    bool parallel = true;

    static ExecPolicy serial() { return ExecPolicy{false}; }
    static ExecPolicy omp() { return ExecPolicy{true}; }
};

// Runs body(i) for i in [0, n). Iterations must be independent.
template <typename Fn>
inline void parallel_for(const ExecPolicy& exec, std::size_t n, Fn&& body) {
    if (exec.parallel) {
#pragma omp parallel for schedule(dynamic)
        for (long long i = 0; i < static_cast<long long>(n); ++i) {
            body(static_cast<std::size_t>(i));
        }
    } else {
        for (std::size_t i = 0; i < n; ++i) body(i);
    }
}

inline int max_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

}  // namespace psim
