#pragma once

#include <cstddef>
#include <exception>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace zrp {

// Serial reference path: runs body(0), ..., body(n-1) in order.  Kept as the
// ground truth the parallel kernel is checked against.
template <class Body>
void run_replicas_serial(std::size_t n, Body&& body) {
    for (std::size_t r = 0; r < n; ++r) body(r);
}

// OpenMP fan-out over replicas.  Each body(r) must touch only slot r of any
// shared output, which makes the result independent of the schedule and
// bit-identical to the serial path.  threads <= 1 falls back to the serial
// reference.  The first exception thrown by any replica is rethrown after
// the parallel region joins.
template <class Body>
void run_replicas(std::size_t n, int threads, Body&& body) {
    if (threads <= 1 || n <= 1) {
        run_replicas_serial(n, body);
        return;
    }
#ifdef _OPENMP
    std::exception_ptr first_error = nullptr;
#pragma omp parallel for schedule(dynamic) num_threads(threads)
    for (long long r = 0; r < static_cast<long long>(n); ++r) {
        try {
            body(static_cast<std::size_t>(r));
        } catch (...) {
#pragma omp critical
            {
                if (!first_error) first_error = std::current_exception();
            }
        }
    }
    if (first_error) std::rethrow_exception(first_error);
#else
    run_replicas_serial(n, body);
#endif
}

}  // namespace zrp
