#include "nlflow/brownian.hpp"

#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "nlflow/errors.hpp"
#include "nlflow/rng.hpp"

namespace nlflow {
namespace {

std::int64_t to_lattice(double w) {
  const double q = std::nearbyint(w / BrownianPath::kQuantum);
  if (!(std::abs(q) < 0x1.0p62)) {
    throw OverflowError("Brownian position outside the lattice range", 0);
  }
  return static_cast<std::int64_t>(q);
}

}  // namespace

BrownianPath generate_path(std::uint64_t seed, double dt, std::size_t n_steps, std::size_t m) {
  if (!(dt > 0.0) || !std::isfinite(dt)) {
    throw ParameterError(fmt::format("dt must be positive, got {}", dt));
  }
  if (n_steps < 1) throw ParameterError("n_steps must be >= 1");
  if (m < 1) throw ParameterError("noise dimension must be >= 1");

  BrownianPath p(seed, dt, n_steps, m, 0);
  const double sd = std::sqrt(dt);
  for (std::size_t k = 0; k < n_steps; ++k) {
    for (std::size_t j = 0; j < m; ++j) {
      const double z = rng::gaussian(rng::key(seed, 0, k, j));
      p.lattice_[(k + 1) * m + j] = p.lattice_[k * m + j] + to_lattice(sd * z);
    }
  }
  return p;
}

BrownianPath BrownianPath::refined() const {
  BrownianPath fine(seed_, 0.5 * dt_, 2 * n_steps_, m_, level_ + 1);
  // conditional sd of the midpoint given both ends: sqrt(dt/4)
  const double sd = 0.5 * std::sqrt(dt_);
  const auto lvl = static_cast<std::uint64_t>(level_ + 1);
  for (std::size_t k = 0; k <= n_steps_; ++k) {
    for (std::size_t j = 0; j < m_; ++j) fine.lattice_[2 * k * m_ + j] = lattice_[k * m_ + j];
  }
  for (std::size_t k = 0; k < n_steps_; ++k) {
    for (std::size_t j = 0; j < m_; ++j) {
      const double a = static_cast<double>(lattice_[k * m_ + j]);
      const double b = static_cast<double>(lattice_[(k + 1) * m_ + j]);
      const double z = rng::gaussian(rng::key(seed_, lvl, k, j));
      const double mid = 0.5 * (a + b) + sd * z / kQuantum;
      fine.lattice_[(2 * k + 1) * m_ + j] = static_cast<std::int64_t>(std::nearbyint(mid));
    }
  }
  return fine;
}

}  // namespace nlflow
