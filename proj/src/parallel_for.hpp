#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <thread>
#include <vector>

#include <Eigen/Core>

namespace llqr::detail {

/// Runs fn(i) for i = 0..count-1 across hardware threads. Work items must be
/// independent; the first exception thrown by any item is rethrown here.
template <typename Fn>
void parallel_for_index(Eigen::Index count, Fn&& fn) {
    if (count <= 0) return;
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const unsigned workers =
        static_cast<unsigned>(std::min<Eigen::Index>(count, static_cast<Eigen::Index>(hw)));
    if (workers <= 1) {
        for (Eigen::Index i = 0; i < count; ++i) fn(i);
        return;
    }

    std::atomic<Eigen::Index> next{0};
    std::exception_ptr error;
    std::atomic<bool> failed{false};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned t = 0; t < workers; ++t) {
        pool.emplace_back([&] {
            while (true) {
                const Eigen::Index i = next.fetch_add(1);
                if (i >= count || failed.load()) return;
                try {
                    fn(i);
                } catch (...) {
                    if (!failed.exchange(true)) error = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace llqr::detail
