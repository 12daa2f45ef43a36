#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <functional>
#include <span>
#include <thread>
#include <vector>

namespace nlflow::stats {

/// Pairwise (cascade) summation: the result depends only on the order of
/// `values`, never on how the values were produced.
double pairwise_sum(std::span<const double> values) noexcept;

struct Summary {
  std::size_t n = 0;
  double mean = 0.0;
  double variance = 0.0;  // unbiased
  double std_error = 0.0;
  /// 95% normal-approximation half-width, 1.96 * std_error.
  double ci_halfwidth = 0.0;
};

/// Requires at least two values (SamplingError otherwise).
Summary summarize(std::span<const double> values);

/// Half-width of the 95% normal-approximation interval of a proportion.
double proportion_halfwidth(double p, std::size_t n) noexcept;

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  std::size_t n = 0;
};

/// Unweighted least squares y = intercept + slope x. Throws RegressionError
/// for fewer than two points, non-finite input or a singular design (all x
/// equal). R^2 is 1 when y is constant and the fit is exact.
LinearFit ordinary_least_squares(std::span<const double> x, std::span<const double> y);

/// Number of worker threads used by parallel_map; 0 selects the hardware
/// concurrency.
void set_worker_count(std::size_t workers) noexcept;
std::size_t worker_count() noexcept;

/// Evaluates fn(0..n-1) on the worker pool and returns the results in index
/// order. If several calls throw, the exception of the lowest index is
/// rethrown, so failures are as reproducible as results.
template <typename T>
std::vector<T> parallel_map(std::size_t n, const std::function<T(std::size_t)>& fn) {
  std::vector<T> out(n);
  std::vector<std::exception_ptr> errors(n);
  const std::size_t workers = std::min(worker_count(), n);
  auto run = [&](std::size_t w) {
    for (std::size_t i = w; i < n; i += workers) {
      try {
        out[i] = fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (workers <= 1) {
    run(0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(run, w);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

}  // namespace nlflow::stats
