#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <thread>
#include <type_traits>
#include <vector>

namespace fasa {

/// Evaluates fn(i) for i in [0, count) on up to `workers` threads and returns
/// the results in index order. Results depend only on i, never on which
/// thread ran it. If any call throws, the exception of the smallest failing
/// index is rethrown after all threads have joined.
template <class F>
auto parallel_map(std::uint64_t count, unsigned workers, F&& fn)
    -> std::vector<std::invoke_result_t<F&, std::uint64_t>> {
  using R = std::invoke_result_t<F&, std::uint64_t>;
  std::vector<R> results(count);
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::uint64_t> next{0};
  auto work = [&] {
    for (std::uint64_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
      try {
        results[i] = fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const auto threads = static_cast<unsigned>(
      std::min<std::uint64_t>(std::max(1u, workers), std::max<std::uint64_t>(count, 1)));
  if (threads <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) {
      pool.emplace_back(work);
    }
  }
  for (auto& e : errors) {
    if (e) {
      std::rethrow_exception(e);
    }
  }
  return results;
}

}  // namespace fasa
