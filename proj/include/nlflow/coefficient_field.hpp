#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nlflow/modulus.hpp"

namespace nlflow {

using Point = std::vector<double>;

/// Writes sigma(x) into `out` as a row-major d x m matrix.
using SigmaFn = std::function<void(std::span<const double> x, std::span<double> out)>;
/// Writes b(x) into `out` (length d).
using DriftFn = std::function<void(std::span<const double> x, std::span<double> out)>;

using FieldParams = std::map<std::string, double>;

/// Coefficients of dX = sigma(X) dW + b(X) dt together with the metadata the
/// verifiers need: the declared modulus r and constant C of the
/// non-Lipschitz condition, the support radius, and optionally the growth
/// function of the escape condition.
struct CoefficientField {
  std::string name;
  FieldParams params;
  std::size_t dim_state = 1;
  std::size_t dim_noise = 1;
  SigmaFn sigma;
  DriftFn drift;
  /// sigma and b vanish for |x| >= support_radius; empty means unbounded.
  std::optional<double> support_radius;
  ModulusSpec modulus;
  double modulus_constant = 1.0;
  /// Radius of the ball on which `modulus_constant` is valid; empty means
  /// everywhere.
  std::optional<double> h1_radius;
  std::optional<GrowthSpec> growth;
  /// sigma is identically zero (deterministic flow).
  bool diffusion_free = false;

  std::vector<double> sigma_at(std::span<const double> x) const;
  std::vector<double> drift_at(std::span<const double> x) const;
};

double euclidean_norm(std::span<const double> x) noexcept;

/// Quintic smoothstep cutoff in |x|: 1 on |x| <= R, 0 on |x| >= R + 1,
/// 1 - (6u^5 - 15u^4 + 10u^3) with u = |x| - R in between (C^2).
double smooth_cutoff(double norm, double radius) noexcept;

/// Largest slope of `smooth_cutoff`, reached at u = 1/2.
inline constexpr double kCutoffMaxSlope = 1.875;

/// sigma_R = sigma * f_R and b_R = b * f_R. The declared modulus constant is
/// carried over unchanged; re-run verify_h1_empirically on the result.
CoefficientField truncate_field(const CoefficientField& field, double radius);

struct H1Options {
  double min_separation = 1e-12;
  double tolerance = 0.05;
  /// Fraction of base points drawn log-uniformly close to the origin, where
  /// the corpus fields are least regular.
  double near_origin_fraction = 0.1;
};

struct H1Report {
  double sigma_ratio = 0.0;  // max ||sigma(x)-sigma(y)||^2 / (|x-y|^2 r(|x-y|^2))
  double drift_ratio = 0.0;  // max |b(x)-b(y)| / (|x-y| r(|x-y|^2))
  std::size_t valid_pairs = 0;
  double smallest_separation = 0.0;
  bool pass = false;
};

/// Samples pairs in the ball of radius `radius` with |x-y|^2 <= delta_o and
/// separations log-uniform down to `min_separation`, and reports the worst
/// ratios against the declared modulus. Pass iff both ratios are within
/// C (1 + tolerance).
H1Report verify_h1_empirically(const CoefficientField& field, std::size_t n_pairs,
                               double radius, std::uint64_t seed,
                               const H1Options& options = {});

struct RescaledModulusReport {
  double power = 1.0;
  double scale_m = 1.0;  // M = 4 (R+1)^2 / delta_o
  double sigma_ratio = 0.0;
  double drift_ratio = 0.0;
  double sigma_bound = 0.0;
  double drift_bound = 0.0;
  std::size_t valid_pairs = 0;
  bool pass = false;
};

/// Ratios of coefficient increments on B(R+1) against the rescaled modulus
/// r((|x-y|^2 / M)^p) with M = 4 (R+1)^2 / delta_o. The bound combines the
/// declared constant (small separations) with 2 sup|b| (resp. 4 sup||sigma||^2)
/// over the smallest denominator at large separations. Requires a finite
/// support radius.
RescaledModulusReport check_rescaled_modulus(const CoefficientField& field, double power,
                                             std::size_t n_pairs, std::uint64_t seed,
                                             double tolerance = 0.05);

}  // namespace nlflow
