#pragma once

#include <cstdint>
#include <vector>

namespace nlflow {

/// Discretized m-dimensional Brownian motion on a uniform grid.
///
/// Positions W(t_k) are stored on a fixed-point lattice of spacing 2^-44, so
/// increments are exact differences and every refinement is exactly
/// additive: the two fine increments inside a coarse step sum to the coarse
/// increment bit for bit. Level-0 increments and bridge midpoints are keyed
/// by (seed, level, step, component), which makes a path a pure function of
/// (seed, dt, n_steps, m, level).
class BrownianPath {
 public:
  static constexpr double kQuantum = 0x1.0p-44;

  std::uint64_t seed() const noexcept { return seed_; }
  double dt() const noexcept { return dt_; }
  std::size_t n_steps() const noexcept { return n_steps_; }
  std::size_t dim() const noexcept { return m_; }
  int level() const noexcept { return level_; }
  double horizon() const noexcept { return dt_ * static_cast<double>(n_steps_); }

  /// W(t_{k+1}) - W(t_k) for component j.
  double increment(std::size_t k, std::size_t j) const noexcept {
    return static_cast<double>(lattice_[(k + 1) * m_ + j] - lattice_[k * m_ + j]) * kQuantum;
  }
  /// W(t_k) for component j.
  double position(std::size_t k, std::size_t j) const noexcept {
    return static_cast<double>(lattice_[k * m_ + j]) * kQuantum;
  }

  /// Halves dt by Brownian-bridge midpoint sampling.
  BrownianPath refined() const;

  friend BrownianPath generate_path(std::uint64_t seed, double dt, std::size_t n_steps,
                                    std::size_t m);

 private:
  BrownianPath(std::uint64_t seed, double dt, std::size_t n_steps, std::size_t m, int level)
      : seed_(seed), dt_(dt), n_steps_(n_steps), m_(m), level_(level),
        lattice_((n_steps + 1) * m, 0) {}

  std::uint64_t seed_;
  double dt_;
  std::size_t n_steps_;
  std::size_t m_;
  int level_;
  std::vector<std::int64_t> lattice_;
};

/// N(0, dt) increments per step and component; throws ParameterError unless
/// dt > 0, n_steps >= 1 and m >= 1.
BrownianPath generate_path(std::uint64_t seed, double dt, std::size_t n_steps, std::size_t m);

}  // namespace nlflow
