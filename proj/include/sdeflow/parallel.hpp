#pragma once

#include <exception>
#include <mutex>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "sdeflow/simulate.hpp"

namespace sdeflow {

// Replica-style parallel loop: fn(i) must write only to slot i, aggregation
// stays with the caller (fixed order), so results are identical at any
// thread count. Exceptions are captured and rethrown after the region.
template <typename Fn>
void parallel_for_index(int n, const ExecPolicy& exec, Fn&& fn) {
    std::exception_ptr error;
    std::mutex error_mutex;
    auto guarded = [&](int i) {
        try {
            fn(i);
        } catch (...) {
            std::lock_guard<std::mutex> lock(error_mutex);
            if (!error) error = std::current_exception();
        }
    };
#ifdef _OPENMP
    if (!exec.serial() && n > 1 && !omp_in_parallel()) {
        if (exec.threads > 0) {
#pragma omp parallel for schedule(dynamic, 1) num_threads(exec.threads)
            for (int i = 0; i < n; ++i) guarded(i);
        } else {
#pragma omp parallel for schedule(dynamic, 1)
            for (int i = 0; i < n; ++i) guarded(i);
        }
        if (error) std::rethrow_exception(error);
        return;
    }
#endif
    for (int i = 0; i < n; ++i) guarded(i);
    if (error) std::rethrow_exception(error);
}

} // namespace sdeflow
