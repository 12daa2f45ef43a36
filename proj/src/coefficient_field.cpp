#include "nlflow/coefficient_field.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "nlflow/errors.hpp"
#include "nlflow/rng.hpp"

namespace nlflow {

std::vector<double> CoefficientField::sigma_at(std::span<const double> x) const {
  std::vector<double> out(dim_state * dim_noise, 0.0);
  sigma(x, out);
  return out;
}

std::vector<double> CoefficientField::drift_at(std::span<const double> x) const {
  std::vector<double> out(dim_state, 0.0);
  drift(x, out);
  return out;
}

double euclidean_norm(std::span<const double> x) noexcept {
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s);
}

double smooth_cutoff(double norm, double radius) noexcept {
  if (norm <= radius) return 1.0;
  if (norm >= radius + 1.0) return 0.0;
  const double u = norm - radius;
  return 1.0 - u * u * u * (10.0 + u * (-15.0 + 6.0 * u));
}

CoefficientField truncate_field(const CoefficientField& field, double radius) {
  if (!(radius > 0.0) || !std::isfinite(radius)) {
    throw ParameterError(fmt::format("truncation radius must be positive, got {}", radius));
  }
  CoefficientField out = field;
  out.name = fmt::format("{}|R={}", field.name, radius);
  out.sigma = [inner = field.sigma, radius](std::span<const double> x, std::span<double> s) {
    const double f = smooth_cutoff(euclidean_norm(x), radius);
    if (f == 0.0) {
      std::fill(s.begin(), s.end(), 0.0);
      return;
    }
    inner(x, s);
    for (double& v : s) v *= f;
  };
  out.drift = [inner = field.drift, radius](std::span<const double> x, std::span<double> b) {
    const double f = smooth_cutoff(euclidean_norm(x), radius);
    if (f == 0.0) {
      std::fill(b.begin(), b.end(), 0.0);
      return;
    }
    inner(x, b);
    for (double& v : b) v *= f;
  };
  out.support_radius = field.support_radius ? std::min(*field.support_radius, radius + 1.0)
                                            : radius + 1.0;
  return out;
}

namespace {

Point random_direction(rng::Stream& rs, std::size_t d) {
  Point v(d);
  double n = 0.0;
  while (n == 0.0) {
    for (double& c : v) c = rs.normal();
    n = euclidean_norm(v);
  }
  for (double& c : v) c /= n;
  return v;
}

Point random_in_ball(rng::Stream& rs, std::size_t d, double radius) {
  Point v = random_direction(rs, d);
  const double len = radius * std::pow(rs.uniform(), 1.0 / static_cast<double>(d));
  for (double& c : v) c *= len;
  return v;
}

double squared_distance(std::span<const double> a, std::span<const double> b) noexcept {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

double squared_norm(std::span<const double> a) noexcept {
  double s = 0.0;
  for (double v : a) s += v * v;
  return s;
}

}  // namespace

H1Report verify_h1_empirically(const CoefficientField& field, std::size_t n_pairs,
                               double radius, std::uint64_t seed,
                               const H1Options& options) {
  if (!(radius >= 0.0)) {
    throw ParameterError(fmt::format("sampling radius must be >= 0, got {}", radius));
  }
  const std::size_t d = field.dim_state;
  const double delta_o = field.modulus.delta_o();
  const double max_sep = std::sqrt(delta_o);
  const double log_lo = std::log(options.min_separation);
  const double log_hi = std::log(max_sep);

  rng::Stream rs(seed);
  H1Report rep;
  rep.smallest_separation = std::numeric_limits<double>::infinity();
  std::vector<double> sx(d * field.dim_noise), sy(d * field.dim_noise), bx(d), by(d);

  for (std::size_t k = 0; k < n_pairs; ++k) {
    Point x;
    if (rs.uniform() <= options.near_origin_fraction) {
      x = random_direction(rs, d);
      const double mag = std::min(radius, 1.0) * std::pow(10.0, rs.uniform(-12.0, 0.0));
      for (double& c : x) c *= mag;
    } else {
      x = random_in_ball(rs, d, radius);
    }
    const Point dir = random_direction(rs, d);
    const double sep = std::exp(rs.uniform(log_lo, log_hi));
    Point y(d);
    for (std::size_t i = 0; i < d; ++i) y[i] = x[i] + sep * dir[i];

    const double h2 = squared_distance(x, y);
    if (!(h2 > 0.0) || h2 > delta_o) continue;
    ++rep.valid_pairs;
    rep.smallest_separation = std::min(rep.smallest_separation, std::sqrt(h2));
    const double r = field.modulus(h2);

    field.sigma(x, sx);
    field.sigma(y, sy);
    const double ds2 = squared_distance(sx, sy);
    rep.sigma_ratio = std::max(rep.sigma_ratio, ds2 / (h2 * r));

    field.drift(x, bx);
    field.drift(y, by);
    const double db = std::sqrt(squared_distance(bx, by));
    rep.drift_ratio = std::max(rep.drift_ratio, db / (std::sqrt(h2) * r));
  }
  if (rep.valid_pairs == 0) {
    throw SamplingError(fmt::format(
        "no valid pairs with 0 < |x-y|^2 <= {} among {} samples", delta_o, n_pairs));
  }
  const double limit = field.modulus_constant * (1.0 + options.tolerance);
  rep.pass = rep.sigma_ratio <= limit && rep.drift_ratio <= limit;
  return rep;
}

RescaledModulusReport check_rescaled_modulus(const CoefficientField& field, double power,
                                             std::size_t n_pairs, std::uint64_t seed,
                                             double tolerance) {
  if (!field.support_radius) {
    throw ParameterError("rescaled modulus check needs a compactly supported field");
  }
  if (!(power >= 1.0)) {
    throw ParameterError(fmt::format("power must be >= 1, got {}", power));
  }
  const double delta_o = field.modulus.delta_o();
  if (delta_o > 1.0) {
    throw FamilyError("rescaled modulus needs delta_o <= 1");
  }
  const std::size_t d = field.dim_state;
  const double ball = *field.support_radius + 1.0;
  const double m_scale = 4.0 * ball * ball / delta_o;
  auto rescaled = [&](double h2) {
    const double arg = std::pow(h2 / m_scale, power);
    return field.modulus(std::min(arg, delta_o));
  };

  RescaledModulusReport rep;
  rep.power = power;
  rep.scale_m = m_scale;

  rng::Stream rs(seed);
  std::vector<double> sx(d * field.dim_noise), sy(d * field.dim_noise), bx(d), by(d);
  double sup_sigma2 = 0.0, sup_b = 0.0;
  const double log_lo = std::log(1e-12);
  const double log_hi = std::log(2.0 * ball);
  for (std::size_t k = 0; k < n_pairs; ++k) {
    const Point x = random_in_ball(rs, d, ball);
    const Point dir = random_direction(rs, d);
    const double sep = std::exp(rs.uniform(log_lo, log_hi));
    Point y(d);
    for (std::size_t i = 0; i < d; ++i) y[i] = x[i] + sep * dir[i];
    if (euclidean_norm(y) > ball) continue;
    const double h2 = squared_distance(x, y);
    if (!(h2 > 0.0)) continue;
    ++rep.valid_pairs;
    const double r = rescaled(h2);

    field.sigma(x, sx);
    field.sigma(y, sy);
    field.drift(x, bx);
    field.drift(y, by);
    sup_sigma2 = std::max({sup_sigma2, squared_norm(sx), squared_norm(sy)});
    sup_b = std::max({sup_b, euclidean_norm(bx), euclidean_norm(by)});
    rep.sigma_ratio = std::max(rep.sigma_ratio, squared_distance(sx, sy) / (h2 * r));
    rep.drift_ratio =
        std::max(rep.drift_ratio, std::sqrt(squared_distance(bx, by)) / (std::sqrt(h2) * r));
  }
  if (rep.valid_pairs == 0) {
    throw SamplingError("no valid pairs inside B(R+1)");
  }

  // smallest denominators over separations beyond the (H1) range
  double min_lin = std::numeric_limits<double>::infinity();
  double min_sq = std::numeric_limits<double>::infinity();
  const double lo = std::sqrt(delta_o);
  const double hi = 2.0 * ball;
  constexpr int kScan = 4000;
  for (int i = 0; i <= kScan; ++i) {
    const double xi = lo + (hi - lo) * i / kScan;
    const double r = rescaled(xi * xi);
    min_lin = std::min(min_lin, xi * r);
    min_sq = std::min(min_sq, xi * xi * r);
  }
  rep.drift_bound = std::max(field.modulus_constant, 2.0 * sup_b / min_lin);
  rep.sigma_bound = std::max(field.modulus_constant, 4.0 * sup_sigma2 / min_sq);
  rep.pass = rep.sigma_ratio <= rep.sigma_bound * (1.0 + tolerance) &&
             rep.drift_ratio <= rep.drift_bound * (1.0 + tolerance);
  return rep;
}

}  // namespace nlflow
