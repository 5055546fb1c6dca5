#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace splatsort {

using GaussianId = std::uint32_t;
using TileId     = std::uint32_t;

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Broken caller contract (bad precondition, duplicate ids, desynchronized tables).
class ContractError : public Error {
  public:
    using Error::Error;
};

inline void
require(bool cond, const std::string &msg) {
    if (!cond) {
        throw ContractError(msg);
    }
}

/// Runs fn(i) for i in [0, n) on up to `workers` threads. Work items must write
/// to disjoint outputs; the first exception raised by any item is rethrown.
inline void
parallelFor(std::size_t n, unsigned workers, const std::function<void(std::size_t)> &fn) {
    if (workers <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) {
            fn(i);
        }
        return;
    }
    const auto nthreads = static_cast<unsigned>(std::min<std::size_t>(workers, n));
    std::atomic<std::size_t> next{0};
    std::exception_ptr firstError;
    std::mutex errorMutex;
    std::vector<std::thread> pool;
    pool.reserve(nthreads);
    for (unsigned t = 0; t < nthreads; ++t) {
        pool.emplace_back([&] {
            for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(errorMutex);
                    if (!firstError) {
                        firstError = std::current_exception();
                    }
                }
            }
        });
    }
    for (auto &th : pool) {
        th.join();
    }
    if (firstError) {
        std::rethrow_exception(firstError);
    }
}

} // namespace splatsort
