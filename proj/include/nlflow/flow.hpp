#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "nlflow/brownian.hpp"
#include "nlflow/coefficient_field.hpp"

namespace nlflow {

enum class Scheme { EulerMaruyama };
std::string_view to_string(Scheme scheme);

/// Coordinates beyond this magnitude abort a simulation with OverflowError.
inline constexpr double kOverflowLimit = 1e300;

struct SimulationOptions {
  /// Record every `record_stride`-th step (the final step is always kept).
  std::size_t record_stride = 1;
  /// Explicit step indices to record; overrides the stride when non-empty.
  std::vector<std::size_t> record_steps;
};

/// Trajectories of many initial points driven by one Brownian path.
struct FlowEnsemble {
  CoefficientField field;
  std::vector<Point> initial_points;
  BrownianPath path;
  Scheme scheme = Scheme::EulerMaruyama;
  /// Step index of each stored record, increasing, starting at 0.
  std::vector<std::size_t> steps;
  /// Row-major (record, point, coordinate).
  std::vector<double> trajectories;

  std::size_t n_points() const noexcept { return initial_points.size(); }
  std::size_t dim() const noexcept { return field.dim_state; }
  std::size_t n_records() const noexcept { return steps.size(); }
  double time(std::size_t record) const noexcept {
    return static_cast<double>(steps[record]) * path.dt();
  }
  std::span<const double> state(std::size_t record, std::size_t point) const noexcept {
    return {trajectories.data() + (record * n_points() + point) * dim(), dim()};
  }
  std::span<const double> final_state(std::size_t point) const noexcept {
    return state(n_records() - 1, point);
  }
};

/// Euler-Maruyama with common noise: for every point
///   X_{k+1} = X_k + sigma(X_k) dW_k + b(X_k) dt
/// with the same dW_k. Throws OverflowError (with the step index) when a
/// coordinate becomes non-finite or exceeds kOverflowLimit.
FlowEnsemble simulate_ensemble(const CoefficientField& field, std::vector<Point> initial_points,
                               const BrownianPath& path, Scheme scheme = Scheme::EulerMaruyama,
                               const SimulationOptions& options = {});

struct RefinementResult {
  FlowEnsemble ensemble;
  double dt = 0.0;
  int refinements = 0;
  bool converged = false;
  /// Largest relative endpoint change at the last refinement.
  double last_change = 0.0;
};

/// Halves dt (refining the same Brownian path) until every endpoint moves
/// by less than `target` relative to its own norm. Non-convergence after
/// `max_refinements` is reported through `converged`, not thrown.
RefinementResult refine_until_converged(const CoefficientField& field,
                                        const std::vector<Point>& initial_points,
                                        std::uint64_t seed, double horizon, double dt0,
                                        double target, int max_refinements = 12,
                                        const SimulationOptions& options = {});

enum class HittingKind { PairContact, BallExit, BallEntry };
std::string_view to_string(HittingKind kind);

struct HittingQuery {
  HittingKind kind = HittingKind::PairContact;
  std::size_t point = 0;
  std::size_t other = 1;  // PairContact only
  /// eps (squared distance), K, or R depending on the kind.
  double threshold = 0.0;

  static HittingQuery pair_contact(std::size_t i, std::size_t j, double eps) {
    return {HittingKind::PairContact, i, j, eps};
  }
  static HittingQuery ball_exit(std::size_t i, double k) { return {HittingKind::BallExit, i, 0, k}; }
  static HittingQuery ball_entry(std::size_t i, double r) {
    return {HittingKind::BallEntry, i, 0, r};
  }
};

struct HittingTimeRecord {
  HittingKind kind = HittingKind::PairContact;
  double threshold = 0.0;
  /// First recorded time at which the threshold is crossed; empty when it
  /// is not crossed within the horizon.
  std::optional<double> time;
};

/// Resolved at the recorded steps (every step with the default options).
HittingTimeRecord hitting_time(const FlowEnsemble& ensemble, const HittingQuery& query);

/// Squared distance between two points of the ensemble at a record.
double pair_squared_distance(const FlowEnsemble& ensemble, std::size_t record, std::size_t i,
                             std::size_t j) noexcept;

/// CSV with header `t,point_id,x_1..x_d`, time-major rows.
void write_trajectory_csv(const FlowEnsemble& ensemble, std::ostream& out);

}  // namespace nlflow
