#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <type_traits>
#include <vector>

#include "histwalk/random.hpp"

namespace histwalk {

inline unsigned default_threads() { return std::max(1u, std::thread::hardware_concurrency()); }

/// Evaluates fn(0..count-1) on a small worker pool. Results come back in
/// index order whatever the scheduling, so downstream folds are
/// deterministic. The first exception thrown by any task is rethrown.
template <class F>
auto parallel_map(std::size_t count, F&& fn, unsigned threads = 0) {
    using R = std::invoke_result_t<F&, std::size_t>;
    std::vector<R> results(count);
    const unsigned workers = std::min<std::size_t>(threads ? threads : default_threads(), std::max<std::size_t>(count, 1));
    if (workers <= 1) {
        for (std::size_t k = 0; k < count; ++k) results[k] = fn(k);
        return results;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (std::size_t k = next++; k < count; k = next++) {
                    try {
                        results[k] = fn(k);
                    } catch (...) {
                        std::lock_guard lock(failure_mutex);
                        if (!failure) failure = std::current_exception();
                    }
                }
            });
        }
    }
    if (failure) std::rethrow_exception(failure);
    return results;
}

/// Samples per independent RNG stream in chunked Monte Carlo loops.
inline constexpr std::uint64_t kChunkSamples = 1u << 16;

/// Runs `samples` trials split into fixed-size chunks; chunk c draws from
/// stream (seed, c) and its accumulator is merged in chunk order. The result
/// therefore depends only on (samples, seed), not on the thread count.
///
/// body(RandomStream&, std::uint64_t n, Acc&) must process n trials.
template <class Acc, class Body>
Acc chunked_monte_carlo(std::uint64_t samples, std::uint64_t seed, Body&& body, unsigned threads = 0) {
    const std::uint64_t chunks = (samples + kChunkSamples - 1) / kChunkSamples;
    auto parts = parallel_map(
        chunks,
        [&](std::size_t c) {
            Acc acc{};
            RandomStream rng(seed, c);
            const std::uint64_t begin = c * kChunkSamples;
            body(rng, std::min(kChunkSamples, samples - begin), acc);
            return acc;
        },
        threads);
    Acc total{};
    for (const auto& p : parts) total.merge(p);
    return total;
}

} // namespace histwalk
