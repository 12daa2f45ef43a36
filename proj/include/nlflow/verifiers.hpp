#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "nlflow/coefficient_field.hpp"

namespace nlflow {

enum class Verdict { Pass, Fail, ReportOnly };
std::string_view to_string(Verdict verdict);

/// One row of the estimate table written next to a check record.
struct EstimateRow {
  double t = 0.0;
  double separation_or_x0 = 0.0;
  double estimate = 0.0;
  double ci_halfwidth = 0.0;
  std::size_t n = 0;
};

/// Serializable outcome of a check: {check, field, params, statistics, verdict}
/// plus the rows of its CSV.
struct CheckReport {
  std::string check;
  std::string field;
  nlohmann::ordered_json params = nlohmann::ordered_json::object();
  nlohmann::ordered_json statistics = nlohmann::ordered_json::object();
  Verdict verdict = Verdict::ReportOnly;
  std::vector<EstimateRow> rows;

  nlohmann::ordered_json to_json() const;
};

/// CSV columns: t,separation_or_x0,estimate,ci_halfwidth,n.
void write_estimates_csv(const std::vector<EstimateRow>& rows, std::ostream& out);

/// Numerical settings shared by the Monte Carlo checks. Replication r uses
/// the Brownian path with seed seed0 + r; within a replication all points
/// share that path.
struct McSettings {
  std::size_t n_replications = 100;
  double dt = 1e-3;
  std::uint64_t seed0 = 0;
};

/// Default separation floor 1e-3 (R + 1), where R is the support radius of
/// the field or, for unbounded fields, `fallback_radius`.
double default_delta_floor(const CoefficientField& field, double fallback_radius);

struct MomentReport {
  /// "power" for 2p > 0, "negative-power" for 2 alpha < 0.
  std::string functional;
  double power = 2.0;
  double t = 0.0;
  double estimate = 0.0;
  double ci_halfwidth = 0.0;
  std::size_t n_replications = 0;
  /// All replications gave the same value (zero-width interval).
  bool degenerate = false;
  /// Replications whose pair distance was exactly 0 at time t.
  std::size_t contacts = 0;
};

/// Mean of |X_t(x0) - X_t(y0)|^power over replications. Negative powers
/// require |x0 - y0| >= delta_floor (default: default_delta_floor with the
/// pair's largest norm as fallback radius). ParameterError for x0 == y0 or
/// fewer than two replications.
MomentReport estimate_pair_moment(const CoefficientField& field, const Point& x0, const Point& y0,
                                  double power, double t, const McSettings& mc,
                                  std::optional<double> delta_floor = std::nullopt);

struct HolderFit {
  double t = 0.0;
  double power = 2.0;
  std::vector<double> separations;
  std::vector<double> moments;
  std::vector<double> ci_halfwidths;
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

/// For each t, regresses log E|X_t(base + s e_1) - X_t(base)|^power on log s.
/// Separations: at least 4, all in ]0, sqrt(delta_o)], spanning at least 3
/// decades (GridError otherwise).
std::vector<HolderFit> fit_holder_exponent(const CoefficientField& field, const Point& base,
                                           const std::vector<double>& separations, double power,
                                           const std::vector<double>& t_grid,
                                           const McSettings& mc);

struct HolderCheck {
  std::vector<HolderFit> fits;
  /// Least-squares C_p in slope(t) = power e^{-C_p t}.
  double fitted_c_p = 0.0;
  CheckReport report;
};

/// Log-type moduli: slopes strictly decreasing in t and slope(0) within 5% of
/// the power. Constant modulus: every slope within 5% of the power.
HolderCheck check_holder(const CoefficientField& field, const Point& base,
                         const std::vector<double>& separations, double power,
                         const std::vector<double>& t_grid, const McSettings& mc);

struct TimeRegularityCheck {
  std::vector<double> lags;
  std::vector<double> moments;
  std::optional<double> slope;
  bool degenerate = false;
  CheckReport report;
};

/// E|X_t(x0) - X_s(x0)|^power over the (s, t) pairs; the log-log slope in
/// |t - s| must be at least power/2 - 0.2. Requires a compactly supported
/// field (ParameterError otherwise).
TimeRegularityCheck check_time_regularity(const CoefficientField& field, const Point& x0,
                                          double power,
                                          const std::vector<std::pair<double, double>>& times,
                                          const McSettings& mc);

struct NonconfluenceCheck {
  std::vector<double> eps_grid;  // sorted decreasing
  /// frequencies[pair][k]: fraction of replications with tau_eps_k < horizon.
  std::vector<std::vector<double>> frequencies;
  std::size_t exact_contacts = 0;
  std::size_t pair_steps = 0;
  bool monotone = true;
  /// Per pair: smallest C >= 0 for which the bound dominates every frequency,
  /// the unconstrained log-space least-squares C, and whether the bound is
  /// defined at all (xi0 <= delta_o).
  std::vector<std::optional<double>> envelope_c;
  std::vector<std::optional<double>> least_squares_c;
  CheckReport report;
};

/// tau_eps is the first recorded step with |X(x) - X(y)|^2 <= eps.
NonconfluenceCheck check_nonconfluence(const CoefficientField& field,
                                       const std::vector<std::pair<Point, Point>>& pairs,
                                       double horizon, const std::vector<double>& eps_grid,
                                       const McSettings& mc);

struct EscapeCheck {
  std::vector<double> x0_norms;  // sorted increasing
  std::vector<double> probabilities;
  std::vector<double> ci_halfwidths;
  bool monotone = true;
  std::optional<double> envelope_c;
  std::vector<std::optional<double>> bounds;
  CheckReport report;
};

/// Empirical P(inf_{s <= horizon} |X_s(x0)| <= R) for x0 = |x0| e_1. The
/// monotonicity test allows each increase up to the sum of the two 95%
/// half-widths. The bound is compared only when the field declares growth.
EscapeCheck check_escape(const CoefficientField& field, const std::vector<double>& x0_norms,
                         double radius, double horizon, const McSettings& mc);

struct HomeomorphismCheck {
  bool order_preserved = true;  // 1D only; true in higher dimensions
  std::optional<std::size_t> first_order_violation_step;
  double delta = 0.0;
  double eta_max = 0.0;
  double eta_final = 0.0;
  double eta_limit = 0.0;  // 1 / delta
  double min_edge_distortion = 0.0;
  double max_edge_distortion = 0.0;
  CheckReport report;
};

/// One path, every step recorded. In 1D the grid must be strictly increasing
/// (GridError); coincident points are rejected in every dimension. eta is
/// max 1/|X_t(x) - X_t(y)| over pairs with |x - y| >= delta.
HomeomorphismCheck check_homeomorphism_grid(const CoefficientField& field,
                                            const std::vector<Point>& grid, double horizon,
                                            double dt, std::uint64_t seed,
                                            std::optional<double> delta = std::nullopt);

}  // namespace nlflow
