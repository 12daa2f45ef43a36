#pragma once

#include <functional>

namespace nlflow {

struct QuadratureResult {
  double value = 0.0;
  double error_estimate = 0.0;
  long evaluations = 0;
};

/// Adaptive Simpson rule with Richardson correction on [a, b].
/// Throws QuadratureError when the recursion depth runs out before the
/// absolute tolerance is met or the integrand returns a non-finite value.
QuadratureResult adaptive_simpson(const std::function<double(double)>& f,
                                  double a, double b, double abs_tol,
                                  int max_depth = 48);

}  // namespace nlflow
