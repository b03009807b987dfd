#pragma once

#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

#include <omp.h>

namespace mindstone {

inline std::size_t default_workers() noexcept {
    auto n = std::thread::hardware_concurrency();
    return n == 0 ? 1 : n;
}

/// Runs fn(i) for i in [0, n) on up to `workers` OpenMP threads. Falls back to
/// a plain loop for one worker or when already inside a parallel region.
/// Exceptions are captured per index and the lowest-index one is rethrown
/// after the loop, so error behaviour matches the serial loop's first failure.
template <typename Fn>
void parallel_for(std::size_t n, std::size_t workers, Fn&& fn) {
    if (workers <= 1 || n <= 1 || omp_in_parallel()) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::exception_ptr> errors(n);
    const auto count = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for num_threads(static_cast<int>(workers)) schedule(dynamic, 1)
    for (std::ptrdiff_t i = 0; i < count; ++i) {
        try {
            fn(static_cast<std::size_t>(i));
        } catch (...) {
            errors[static_cast<std::size_t>(i)] = std::current_exception();
        }
    }
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

}  // namespace mindstone
