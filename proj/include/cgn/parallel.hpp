#pragma once

#include <cstddef>
#include <exception>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace cgn {

// Map-style loop over [0, count). body(i) must write only to slot i of some
// preallocated output, so the result is bit-identical for every worker count;
// all reductions happen serially after the loop. workers == 1 is the serial
// reference path, workers <= 0 means "all hardware threads".
template <class F>
void parallel_for(std::size_t count, int workers, F&& body) {
#ifdef _OPENMP
    if (workers != 1 && count > 1) {
        const int max_threads = omp_get_max_threads();
        int w = workers <= 0 ? max_threads : workers;
        if (w > static_cast<int>(count)) w = static_cast<int>(count);
        std::exception_ptr error;
#pragma omp parallel for schedule(dynamic, 1) num_threads(w)
        for (long long i = 0; i < static_cast<long long>(count); ++i) {
            try {
                body(static_cast<std::size_t>(i));
            } catch (...) {
#pragma omp critical(cgn_parallel_for_error)
                if (!error) error = std::current_exception();
            }
        }
        if (error) std::rethrow_exception(error);
        return;
    }
#else
    (void)workers;
#endif
    for (std::size_t i = 0; i < count; ++i) body(i);
}

} // namespace cgn
