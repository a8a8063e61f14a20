#pragma once

#include <cstdint>
#include <exception>
#include <optional>
#include <type_traits>
#include <vector>

#include "epibsl/rng.hpp"

namespace epibsl {

/// Stream seed of replicate r under a master seed.
constexpr std::uint64_t replicate_seed(std::uint64_t master, std::int64_t r) {
    return mix(master, static_cast<std::uint64_t>(r));
}

/// Thread count to use: `requested` if positive, else EPIBSL_THREADS if set and positive,
/// else the OpenMP default.
int resolve_threads(int requested = 0);

/// Reference runner: f(0), ..., f(n-1) in order on the calling thread.
template <class F>
auto map_replicates_serial(std::int64_t n, F&& f) {
    using R = std::invoke_result_t<F&, std::int64_t>;
    std::vector<R> out;
    out.reserve(static_cast<std::size_t>(n > 0 ? n : 0));
    for (std::int64_t i = 0; i < n; ++i) out.push_back(f(i));
    return out;
}

/// OpenMP runner with the same result as map_replicates_serial whenever f(i) depends only on i.
/// Slot i holds f(i) regardless of scheduling. If any call throws, the exception of the lowest
/// failing index is rethrown after the loop.
template <class F>
auto map_replicates(std::int64_t n, int threads, F&& f) {
    using R = std::invoke_result_t<F&, std::int64_t>;
    const int nt = resolve_threads(threads);
    std::vector<std::optional<R>> slots(static_cast<std::size_t>(n > 0 ? n : 0));
    std::vector<std::exception_ptr> errors(slots.size());
#pragma omp parallel for num_threads(nt) schedule(dynamic)
    for (std::int64_t i = 0; i < n; ++i) {
        try {
            slots[static_cast<std::size_t>(i)].emplace(f(i));
        } catch (...) {
            errors[static_cast<std::size_t>(i)] = std::current_exception();
        }
    }
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    std::vector<R> out;
    out.reserve(slots.size());
    for (auto& s : slots) out.push_back(std::move(*s));
    return out;
}

}  // namespace epibsl
