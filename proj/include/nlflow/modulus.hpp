#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace nlflow {

enum class ModulusFamily { Log, LogLog, Constant, Tabulated };

std::string_view to_string(ModulusFamily family);
ModulusFamily modulus_family_from_string(std::string_view name);

/// Upper end of the LogLog domain, 1/(2e); keeps log(log(1/s)) positive.
inline constexpr double kLogLogDeltaMax = 0.18393972058572117;

/// Continuity modulus r on ]0, delta_o].
///
///   Log       r(s) = scale * log(1/s)
///   LogLog    r(s) = scale * log(1/s) * log(log(1/s))
///   Constant  r(s) = scale                      (Lipschitz baseline)
///   Tabulated piecewise power law through (s_i, r_i), interpolated linearly
///             in log-log coordinates and extrapolated with the end slopes.
///
/// Immutable; copies share the table.
class ModulusSpec {
 public:
  /// Validates the family/domain combination; throws FamilyError or
  /// ParameterError. Tabulated specs must come from `tabulated()`.
  ModulusSpec(ModulusFamily family, double delta_o, double scale);

  static ModulusSpec log(double scale = 1.0, double delta_o = 0.36787944117144233);
  static ModulusSpec log_log(double scale = 1.0);
  static ModulusSpec constant(double value, double delta_o = 1.0);
  static ModulusSpec tabulated(std::vector<double> s, std::vector<double> r,
                               double delta_o);

  ModulusFamily family() const noexcept { return family_; }
  double delta_o() const noexcept { return delta_o_; }
  double scale() const noexcept { return scale_; }

  /// r(s); DomainError unless 0 < s <= delta_o.
  double operator()(double s) const;
  /// r'(s): closed form for built-in families, central difference with
  /// step s*1e-6 for tabulated data.
  double derivative(double s) const;

  /// Formula evaluation without the domain check (used by quadrature and
  /// finite differences that may step marginally past delta_o).
  double value_unchecked(double s) const noexcept;

  std::span<const double> table_log_s() const noexcept;
  std::span<const double> table_log_r() const noexcept;

  /// Closed-form verdict on condition (ii) (divergence of the integral of
  /// 1/(s r(s)) at 0); empty for tabulated data.
  std::optional<bool> analytic_divergence() const noexcept;

 private:
  struct Table {
    std::vector<double> log_s;
    std::vector<double> log_r;
  };

  ModulusSpec(double delta_o, std::shared_ptr<const Table> table);

  ModulusFamily family_;
  double delta_o_;
  double scale_;
  std::shared_ptr<const Table> table_;
};

/// Free-function form of `spec(s)`.
double eval_modulus(const ModulusSpec& spec, double s);

/// `n` points geometrically spaced from `hi` down to `lo` (descending).
std::vector<double> geometric_grid(double hi, double lo, std::size_t n);

struct ModulusConditionReport {
  // (i) r grows without bound as s -> 0
  bool unbounded_growth = false;
  // (ii) the integral of ds/(s r(s)) diverges at 0
  bool integral_diverges = false;
  // (iii) s r'(s) / r(s) -> 0
  bool ratio_vanishes = false;

  /// True when (ii) came from the numeric heuristic rather than a closed form.
  bool divergence_heuristic = false;
  /// Numeric heuristic verdict, always computed for comparison.
  bool numeric_divergence = false;
  /// Partial integral from the grid floor to delta_o.
  double partial_integral = 0.0;
  /// Ratio of the last two per-decade increments of the partial integral;
  /// geometric decay (< 0.8) indicates convergence.
  double decade_increment_ratio = 0.0;
  /// s r'(s)/r(s) at the grid floor.
  double tail_ratio = 0.0;
  std::string note;
};

struct ModulusConditionOptions {
  double divergence_threshold = 1e3;
  double decade_ratio_cutoff = 0.8;
  double ratio_tolerance = 0.1;
};

/// Empirical check of conditions (i)-(iii) on a sample grid inside
/// ]0, delta_o]; the grid needs at least 10 points spanning 6 decades.
ModulusConditionReport check_modulus_conditions(
    const ModulusSpec& spec, std::span<const double> grid,
    const ModulusConditionOptions& options = {});

/// Growth function of the escape condition: rho on [1, inf) together with a
/// strictly positive C^1 extension f on [0, inf) that agrees with rho on
/// [1, inf).
class GrowthSpec {
 public:
  enum class Kind { Constant, Logarithmic };

  /// f == value everywhere. `value` may be 0 as a degenerate input.
  static GrowthSpec constant(double value);
  /// rho(s) = 1 + log s on [1, inf); f(s) = (1 + s^2)/2 on [0, 1).
  static GrowthSpec logarithmic();

  Kind kind() const noexcept { return kind_; }
  double value() const noexcept { return value_; }

  double rho(double s) const;  // DomainError for s < 1
  double f(double s) const;    // DomainError for s < 0
  std::string describe() const;

 private:
  GrowthSpec(Kind kind, double value) : kind_(kind), value_(value) {}
  Kind kind_;
  double value_;
};

/// Sampled check that f > 0 on [0, s_max] and f == rho on [1, s_max].
bool check_growth_invariants(const GrowthSpec& growth, double s_max = 1e6,
                             std::size_t samples = 200);

}  // namespace nlflow
