#include "nlflow/stats.hpp"

#include <atomic>
#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "nlflow/errors.hpp"

namespace nlflow::stats {

namespace {
std::atomic<std::size_t> g_workers{0};
}

double pairwise_sum(std::span<const double> values) noexcept {
  if (values.size() <= 8) {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

Summary summarize(std::span<const double> values) {
  if (values.size() < 2) {
    throw SamplingError(fmt::format("need at least 2 samples, got {}", values.size()));
  }
  Summary s;
  s.n = values.size();
  const double n = static_cast<double>(s.n);
  if (std::all_of(values.begin(), values.end(), [&](double v) { return v == values[0]; })) {
    s.mean = values[0];
    return s;
  }
  s.mean = pairwise_sum(values) / n;
  if (!std::isfinite(s.mean)) {
    s.variance = s.std_error = s.ci_halfwidth = std::numeric_limits<double>::quiet_NaN();
    return s;
  }
  std::vector<double> dev(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double d = values[i] - s.mean;
    dev[i] = d * d;
  }
  s.variance = pairwise_sum(dev) / (n - 1.0);
  s.std_error = std::sqrt(s.variance / n);
  s.ci_halfwidth = 1.96 * s.std_error;
  return s;
}

double proportion_halfwidth(double p, std::size_t n) noexcept {
  if (n == 0) return 0.0;
  return 1.96 * std::sqrt(p * (1.0 - p) / static_cast<double>(n));
}

LinearFit ordinary_least_squares(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw RegressionError("x and y differ in length");
  if (x.size() < 2) throw RegressionError("regression needs at least two points");
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i]) || !std::isfinite(y[i])) {
      throw RegressionError(fmt::format("non-finite regression input at index {}", i));
    }
  }
  const double n = static_cast<double>(x.size());
  const double mx = pairwise_sum(x) / n;
  const double my = pairwise_sum(y) / n;
  std::vector<double> sxx(x.size()), sxy(x.size()), syy(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxx[i] = dx * dx;
    sxy[i] = dx * dy;
    syy[i] = dy * dy;
  }
  const double vxx = pairwise_sum(sxx);
  const double vxy = pairwise_sum(sxy);
  const double vyy = pairwise_sum(syy);
  if (!(vxx > 1e-300) || vxx <= 1e-24 * mx * mx * n) {
    throw RegressionError("singular design: regressor values do not vary");
  }
  LinearFit fit;
  fit.n = x.size();
  fit.slope = vxy / vxx;
  fit.intercept = my - fit.slope * mx;
  fit.r_squared = vyy > 0.0 ? (vxy * vxy) / (vxx * vyy) : 1.0;
  return fit;
}

void set_worker_count(std::size_t workers) noexcept { g_workers = workers; }

std::size_t worker_count() noexcept {
  const std::size_t w = g_workers;
  if (w > 0) return w;
  return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

}  // namespace nlflow::stats
