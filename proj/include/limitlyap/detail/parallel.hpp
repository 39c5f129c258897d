#pragma once

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <optional>
#include <thread>
#include <vector>

namespace limitlyap {
namespace detail {

// LIMITLYAP_THREADS caps internal parallelism (0 or 1 = sequential).
inline int max_threads() {
    if (const char* env = std::getenv("LIMITLYAP_THREADS")) {
        char* end = nullptr;
        long v = std::strtol(env, &end, 10);
        if (end != env && v >= 0) return static_cast<int>(std::min(v, 64L));
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(std::min(hw, 8u));
}

// Chunked map-reduce over [0, n). Chunks are combined in index order, so the
// result is independent of thread scheduling; exceptions are rethrown from
// the lowest-index failing chunk.
template <typename Result, typename ChunkFn, typename CombineFn>
Result parallel_reduce(long n, Result init, ChunkFn chunk, CombineFn combine) {
    const long min_chunk = 256;
    long parts = std::min<long>(max_threads(), std::max<long>(1, n / min_chunk));
    if (parts <= 1) return combine(std::move(init), chunk(0L, n));

    std::vector<std::optional<Result>> results(parts);
    std::vector<std::exception_ptr> errors(parts);
    std::vector<std::thread> pool;
    pool.reserve(parts);
    for (long p = 0; p < parts; ++p) {
        long lo = n * p / parts, hi = n * (p + 1) / parts;
        pool.emplace_back([&, p, lo, hi] {
            try {
                results[p] = chunk(lo, hi);
            } catch (...) {
                errors[p] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (long p = 0; p < parts; ++p)
        if (errors[p]) std::rethrow_exception(errors[p]);
    Result acc = std::move(init);
    for (long p = 0; p < parts; ++p) acc = combine(std::move(acc), std::move(*results[p]));
    return acc;
}

} // namespace detail
} // namespace limitlyap
