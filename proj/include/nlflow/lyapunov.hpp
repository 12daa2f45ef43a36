#pragma once

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "nlflow/modulus.hpp"

namespace nlflow {

/// Lyapunov transform of the pair-contact argument:
///   psi(xi) = int_xi^delta_o ds / (s r(s)),   Phi(xi) = exp(psi(xi)).
/// The upper limit is delta_o rather than 1; the shift cancels in every
/// probability bound (ratios of Phi).
struct ContactTransform {
  ModulusSpec modulus;
  double tolerance = 1e-10;
};

/// Lyapunov transform of the escape argument:
///   psi(xi) = int_0^xi ds / (s f(s) + 1),   Phi(xi) = exp(-psi(xi)).
struct EscapeTransform {
  GrowthSpec growth;
  double tolerance = 1e-10;
};

enum class EvalMethod { ClosedForm, Quadrature, Numeric };
std::string_view to_string(EvalMethod method);

/// psi for the contact transform. Closed forms exist for the Log, LogLog
/// and Constant families; tabulated moduli fall back to quadrature.
double psi_contact(const ContactTransform& t, double xi);
/// Always by adaptive Simpson in u = log(1/s).
double psi_contact_quadrature(const ContactTransform& t, double xi);
std::optional<double> psi_contact_closed_form(const ModulusSpec& modulus, double xi);
EvalMethod psi_contact_method(const ModulusSpec& modulus);

double phi_contact(const ContactTransform& t, double xi);
double phi_contact_quadrature(const ContactTransform& t, double xi);

/// min(1, Phi(xi0) e^{C horizon} / Phi(eps)): upper bound on the probability
/// that the squared pair distance drops to eps before `horizon`.
double noncontact_probability_bound(const ContactTransform& t, double xi0, double eps,
                                    double c, double horizon);

double psi_escape(const EscapeTransform& t, double xi);
double psi_escape_quadrature(const EscapeTransform& t, double xi);
/// Integral of ds/(s f(s) + 1) over [lo, hi].
double escape_integral(const EscapeTransform& t, double lo, double hi);

/// min(1, e^{C horizon} exp(-int_{R^2}^{|x0|^2} ds/(s f(s)+1))): bound on
/// P(inf_{s <= horizon} |X_s| <= R).
double escape_probability_bound(const EscapeTransform& t, double x0_norm, double radius,
                                double c, double horizon);

/// Saturated solution of phi' = C_p phi r(phi), phi(0) = phi0.
class ComparisonSolution {
 public:
  double c_p() const noexcept { return c_p_; }
  const ModulusSpec& modulus() const noexcept { return modulus_; }
  double phi0() const noexcept { return phi0_; }
  EvalMethod method() const noexcept { return method_; }

  /// Grid times reached before the solution left ]0, delta_o].
  const std::vector<double>& times() const noexcept { return times_; }
  const std::vector<double>& values() const noexcept { return values_; }
  /// Time at which phi reaches delta_o, if that happens within the grid.
  std::optional<double> exit_time() const noexcept { return exit_time_; }

  /// phi(t); DomainError for t < 0 or beyond the exit time.
  double at(double t) const;

 private:
  friend ComparisonSolution solve_comparison_ode(double, const ModulusSpec&, double,
                                                 std::span<const double>,
                                                 std::optional<EvalMethod>);
  ComparisonSolution(double c_p, ModulusSpec modulus, double phi0, EvalMethod method)
      : c_p_(c_p), modulus_(std::move(modulus)), phi0_(phi0), method_(method) {}

  double c_p_;
  ModulusSpec modulus_;
  double phi0_;
  EvalMethod method_;
  std::vector<double> times_;
  std::vector<double> values_;
  std::optional<double> exit_time_;
};

/// Closed form for the Log family (phi0^{exp(-C s t)}) and the LogLog family
/// (exp(-[log(1/phi0)]^{exp(-C s t)})); `std::nullopt` otherwise.
std::optional<double> comparison_closed_form(const ModulusSpec& modulus, double c_p,
                                             double phi0, double t);

/// Integrates u' = -C_p r(e^{-u}) for u = log(1/phi) with a Dormand-Prince
/// 5(4) pair (relative step error 1e-9) or uses the closed form. With no
/// method given the closed form is preferred when it exists.
ComparisonSolution solve_comparison_ode(double c_p, const ModulusSpec& modulus, double phi0,
                                        std::span<const double> t_grid,
                                        std::optional<EvalMethod> method = std::nullopt);

struct FeasibilityProbe {
  double c_p = 1.0;
  double t = 0.0;
  /// L = log(1/phi0) for each grid point (phi0 itself underflows quickly).
  std::vector<double> log_inv_phi0;
  /// LogLog bound: L^{e^{-C_p t}} / L, the largest alpha with bound <= phi0^alpha.
  std::vector<double> loglog_ratio;
  bool loglog_ratio_decreasing = false;
  /// Log bound exponent e^{-C_p t}, independent of phi0.
  double log_exponent = 1.0;
};

/// Along a grid of log(1/phi0) values (increasing, i.e. phi0 -> 0).
FeasibilityProbe kolmogorov_feasibility_probe(std::span<const double> log_inv_phi0,
                                              double c_p, double t);

}  // namespace nlflow
