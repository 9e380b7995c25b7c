#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace suggestive {

// Neumaier compensated summation. Summation order is the call order, so the
// result is reproducible for a fixed input sequence.
template <typename Scalar>
class CompensatedSum {
 public:
  void add(Scalar x) {
    const Scalar t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      compensation_ += (sum_ - t) + x;
    } else {
      compensation_ += (x - t) + sum_;
    }
    sum_ = t;
  }

  CompensatedSum& operator+=(Scalar x) {
    add(x);
    return *this;
  }

  Scalar value() const { return sum_ + compensation_; }

 private:
  Scalar sum_ = 0;
  Scalar compensation_ = 0;
};

// Worker count for parallel loops: SUGGESTOR_THREADS if set to a positive
// integer, otherwise the hardware concurrency.
inline std::size_t thread_count() {
  if (const char* env = std::getenv("SUGGESTOR_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
  }
  return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

// Runs body(begin, end) over contiguous chunks of [0, n). Every index is
// processed exactly once by exactly one call, so callers that write each
// output slot from its own index get thread-count independent results.
template <typename Body>
void parallel_for(std::size_t n, Body&& body, std::size_t min_chunk = 1) {
  const std::size_t workers =
      std::min(thread_count(), std::max<std::size_t>(1, n / std::max<std::size_t>(1, min_chunk)));
  if (workers <= 1 || n < 2) {
    if (n > 0) body(std::size_t{0}, n);
    return;
  }
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  const std::size_t chunk = (n + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t begin = w * chunk;
    const std::size_t end = std::min(n, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&, begin, end] {
      try {
        body(begin, end);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace suggestive
