#include "nlflow/lyapunov.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "nlflow/errors.hpp"
#include "nlflow/quadrature.hpp"

namespace nlflow {

std::string_view to_string(EvalMethod method) {
  switch (method) {
    case EvalMethod::ClosedForm: return "ClosedForm";
    case EvalMethod::Quadrature: return "Quadrature";
    case EvalMethod::Numeric: return "Numeric";
  }
  return "?";
}

namespace {

void check_xi(const ModulusSpec& m, double xi) {
  if (!(xi > 0.0) || xi > m.delta_o()) {
    throw DomainError(fmt::format("xi = {} outside ]0, {}]", xi, m.delta_o()));
  }
}

}  // namespace

std::optional<double> psi_contact_closed_form(const ModulusSpec& m, double xi) {
  check_xi(m, xi);
  const double s = m.scale();
  const double l_xi = std::log(1.0 / xi);
  const double l_delta = std::log(1.0 / m.delta_o());
  switch (m.family()) {
    case ModulusFamily::Log:
      return (std::log(l_xi) - std::log(l_delta)) / s;
    case ModulusFamily::LogLog:
      return (std::log(std::log(l_xi)) - std::log(std::log(l_delta))) / s;
    case ModulusFamily::Constant:
      return std::log(m.delta_o() / xi) / s;
    case ModulusFamily::Tabulated:
      return std::nullopt;
  }
  return std::nullopt;
}

EvalMethod psi_contact_method(const ModulusSpec& m) {
  return m.family() == ModulusFamily::Tabulated ? EvalMethod::Quadrature
                                                : EvalMethod::ClosedForm;
}

double psi_contact_quadrature(const ContactTransform& t, double xi) {
  check_xi(t.modulus, xi);
  const double u_lo = std::log(1.0 / t.modulus.delta_o());
  const double u_hi = std::log(1.0 / xi);
  if (u_hi <= u_lo) return 0.0;
  const ModulusSpec& m = t.modulus;
  return adaptive_simpson([&](double u) { return 1.0 / m.value_unchecked(std::exp(-u)); },
                          u_lo, u_hi, t.tolerance)
      .value;
}

double psi_contact(const ContactTransform& t, double xi) {
  if (auto v = psi_contact_closed_form(t.modulus, xi)) return *v;
  return psi_contact_quadrature(t, xi);
}

double phi_contact(const ContactTransform& t, double xi) { return std::exp(psi_contact(t, xi)); }

double phi_contact_quadrature(const ContactTransform& t, double xi) {
  return std::exp(psi_contact_quadrature(t, xi));
}

double noncontact_probability_bound(const ContactTransform& t, double xi0, double eps,
                                    double c, double horizon) {
  check_xi(t.modulus, xi0);
  if (!(eps > 0.0)) throw DomainError(fmt::format("eps must be positive, got {}", eps));
  if (eps >= xi0) {
    throw OrderingError(fmt::format("need eps < xi0, got eps = {} and xi0 = {}", eps, xi0));
  }
  if (!(c >= 0.0)) throw ParameterError(fmt::format("C must be >= 0, got {}", c));
  if (!(horizon >= 0.0)) {
    throw ParameterError(fmt::format("horizon must be >= 0, got {}", horizon));
  }
  // Phi(xi0)/Phi(eps) = exp(psi(xi0) - psi(eps))
  const double log_bound = psi_contact(t, xi0) - psi_contact(t, eps) + c * horizon;
  return std::min(1.0, std::exp(log_bound));
}

double escape_integral(const EscapeTransform& t, double lo, double hi) {
  if (!(lo >= 0.0) || !(hi >= lo)) {
    throw DomainError(fmt::format("escape integral needs 0 <= lo <= hi, got [{}, {}]", lo, hi));
  }
  if (t.growth.kind() == GrowthSpec::Kind::Constant) {
    const double c = t.growth.value();
    if (c == 0.0) return hi - lo;
    return (std::log1p(c * hi) - std::log1p(c * lo)) / c;
  }
  // v = log(1 + s) keeps the integrand slowly varying on long ranges
  const GrowthSpec& g = t.growth;
  return adaptive_simpson(
             [&](double v) {
               const double s = std::expm1(v);
               return std::exp(v) / (s * g.f(std::max(s, 0.0)) + 1.0);
             },
             std::log1p(lo), std::log1p(hi), t.tolerance)
      .value;
}

double psi_escape(const EscapeTransform& t, double xi) { return escape_integral(t, 0.0, xi); }

double psi_escape_quadrature(const EscapeTransform& t, double xi) {
  if (!(xi >= 0.0)) throw DomainError(fmt::format("xi must be >= 0, got {}", xi));
  const GrowthSpec& g = t.growth;
  return adaptive_simpson(
             [&](double v) {
               const double s = std::expm1(v);
               return std::exp(v) / (s * g.f(std::max(s, 0.0)) + 1.0);
             },
             0.0, std::log1p(xi), t.tolerance)
      .value;
}

double escape_probability_bound(const EscapeTransform& t, double x0_norm, double radius,
                                double c, double horizon) {
  if (!(radius > 0.0)) throw ParameterError(fmt::format("R must be positive, got {}", radius));
  if (!(x0_norm > radius)) {
    throw OrderingError(fmt::format("need |x0| > R, got |x0| = {} and R = {}", x0_norm, radius));
  }
  if (!(c >= 0.0)) throw ParameterError(fmt::format("C must be >= 0, got {}", c));
  if (!(horizon >= 0.0)) {
    throw ParameterError(fmt::format("horizon must be >= 0, got {}", horizon));
  }
  const double integral = escape_integral(t, radius * radius, x0_norm * x0_norm);
  return std::min(1.0, std::exp(c * horizon - integral));
}

// ---------------------------------------------------------------------------
// comparison ODE

namespace {

// Time at which the closed-form solution reaches delta_o.
std::optional<double> closed_form_exit(const ModulusSpec& m, double c_p, double phi0) {
  const double u0 = std::log(1.0 / phi0);
  const double ud = std::log(1.0 / m.delta_o());
  const double k = c_p * m.scale();
  switch (m.family()) {
    case ModulusFamily::Log:
      return std::log(u0 / ud) / k;
    case ModulusFamily::LogLog:
      return std::log(std::log(u0) / std::log(ud)) / k;
    case ModulusFamily::Constant:
      return (u0 - ud) / k;
    case ModulusFamily::Tabulated:
      return std::nullopt;
  }
  return std::nullopt;
}

// Dormand-Prince 5(4) on u' = -C_p r(e^{-u}).
class Stepper {
 public:
  Stepper(const ModulusSpec& m, double c_p) : m_(m), c_p_(c_p), u_exit_(std::log(1.0 / m.delta_o())) {}

  // Advances u from t0 to t1. Returns the exit time if u reaches u_exit first.
  std::optional<double> advance(double& u, double t0, double t1) {
    if (!(t1 > t0)) return std::nullopt;
    double t = t0;
    double h = std::min(h_, t1 - t0);
    while (t < t1) {
      h = std::min(h, t1 - t);
      double u5 = 0.0, err = 0.0;
      step(u, h, u5, err);
      const double scale = kRtol * std::max(std::abs(u), std::abs(u5)) + kAtol;
      const double ratio = err / scale;
      if (ratio > 1.0 || !std::isfinite(u5)) {
        h *= std::max(0.2, 0.9 * std::pow(ratio, -0.2));
        if (h < 1e-14 * std::max(1.0, std::abs(t))) {
          throw Error("comparison ODE step size underflow");
        }
        continue;
      }
      if (u5 < u_exit_) return locate_exit(u, t, h);
      t = (t1 - t - h <= 1e-15 * std::max(1.0, t1)) ? t1 : t + h;
      u = u5;
      h *= std::clamp(ratio > 0.0 ? 0.9 * std::pow(ratio, -0.2) : 5.0, 0.2, 5.0);
    }
    h_ = h;
    return std::nullopt;
  }

 private:
  static constexpr double kRtol = 1e-9;
  static constexpr double kAtol = 1e-13;

  double rhs(double u) const { return -c_p_ * m_.value_unchecked(std::exp(-u)); }

  void step(double u, double h, double& u5, double& err) const {
    const double k1 = rhs(u);
    const double k2 = rhs(u + h * (1.0 / 5.0) * k1);
    const double k3 = rhs(u + h * (3.0 / 40.0 * k1 + 9.0 / 40.0 * k2));
    const double k4 = rhs(u + h * (44.0 / 45.0 * k1 - 56.0 / 15.0 * k2 + 32.0 / 9.0 * k3));
    const double k5 = rhs(u + h * (19372.0 / 6561.0 * k1 - 25360.0 / 2187.0 * k2 +
                                   64448.0 / 6561.0 * k3 - 212.0 / 729.0 * k4));
    const double k6 = rhs(u + h * (9017.0 / 3168.0 * k1 - 355.0 / 33.0 * k2 +
                                   46732.0 / 5247.0 * k3 + 49.0 / 176.0 * k4 -
                                   5103.0 / 18656.0 * k5));
    u5 = u + h * (35.0 / 384.0 * k1 + 500.0 / 1113.0 * k3 + 125.0 / 192.0 * k4 -
                  2187.0 / 6784.0 * k5 + 11.0 / 84.0 * k6);
    const double k7 = rhs(u5);
    const double u4 = u + h * (5179.0 / 57600.0 * k1 + 7571.0 / 16695.0 * k3 +
                               393.0 / 640.0 * k4 - 92097.0 / 339200.0 * k5 +
                               187.0 / 2100.0 * k6 + 1.0 / 40.0 * k7);
    err = std::abs(u5 - u4);
  }

  // u(t + h) < u_exit: bisect on the step length.
  double locate_exit(double u, double t, double h) const {
    double lo = 0.0, hi = h;
    for (int i = 0; i < 80; ++i) {
      const double mid = 0.5 * (lo + hi);
      double u5 = 0.0, err = 0.0;
      step(u, mid, u5, err);
      if (u5 < u_exit_) hi = mid; else lo = mid;
    }
    return t + 0.5 * (lo + hi);
  }

  const ModulusSpec& m_;
  double c_p_;
  double u_exit_;
  double h_ = 1e-3;
};

}  // namespace

std::optional<double> comparison_closed_form(const ModulusSpec& m, double c_p, double phi0,
                                             double t) {
  if (m.family() == ModulusFamily::Tabulated) return std::nullopt;
  if (t == 0.0) return phi0;
  const double u0 = std::log(1.0 / phi0);
  const double k = c_p * m.scale();
  switch (m.family()) {
    case ModulusFamily::Log:
      return std::pow(phi0, std::exp(-k * t));
    case ModulusFamily::LogLog:
      return std::exp(-std::pow(u0, std::exp(-k * t)));
    case ModulusFamily::Constant:
      return phi0 * std::exp(k * t);
    case ModulusFamily::Tabulated:
      return std::nullopt;
  }
  return std::nullopt;
}

ComparisonSolution solve_comparison_ode(double c_p, const ModulusSpec& modulus, double phi0,
                                        std::span<const double> t_grid,
                                        std::optional<EvalMethod> method) {
  if (!(c_p > 0.0)) throw ParameterError(fmt::format("C_p must be positive, got {}", c_p));
  if (!(phi0 > 0.0) || phi0 > modulus.delta_o()) {
    throw DomainError(fmt::format("phi0 = {} outside ]0, {}]", phi0, modulus.delta_o()));
  }
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    if (!(t_grid[i] >= 0.0) || (i > 0 && !(t_grid[i] > t_grid[i - 1]))) {
      throw GridError("time grid must be nonnegative and strictly increasing");
    }
  }
  const bool has_closed = modulus.family() != ModulusFamily::Tabulated;
  EvalMethod chosen = method.value_or(has_closed ? EvalMethod::ClosedForm : EvalMethod::Numeric);
  if (chosen == EvalMethod::Quadrature) {
    throw ParameterError("comparison ODE methods are ClosedForm or Numeric");
  }
  if (chosen == EvalMethod::ClosedForm && !has_closed) {
    throw FamilyError("no closed-form comparison solution for tabulated moduli");
  }

  ComparisonSolution sol(c_p, modulus, phi0, chosen);
  if (chosen == EvalMethod::ClosedForm) {
    const auto exit = closed_form_exit(modulus, c_p, phi0);
    for (double t : t_grid) {
      if (exit && t > *exit) {
        sol.exit_time_ = exit;
        break;
      }
      sol.times_.push_back(t);
      sol.values_.push_back(*comparison_closed_form(modulus, c_p, phi0, t));
    }
    return sol;
  }

  Stepper stepper(modulus, c_p);
  double u = std::log(1.0 / phi0);
  double t = 0.0;
  for (double tg : t_grid) {
    if (auto exit = stepper.advance(u, t, tg)) {
      sol.exit_time_ = exit;
      break;
    }
    t = tg;
    sol.times_.push_back(tg);
    sol.values_.push_back(tg == 0.0 ? phi0 : std::exp(-u));
  }
  return sol;
}

double ComparisonSolution::at(double t) const {
  if (!(t >= 0.0)) throw DomainError(fmt::format("time must be >= 0, got {}", t));
  if (exit_time_ && t > *exit_time_) {
    throw DomainError(fmt::format("phi leaves ]0, delta_o] at t = {} before t = {}",
                                  *exit_time_, t));
  }
  if (method_ == EvalMethod::ClosedForm) {
    return *comparison_closed_form(modulus_, c_p_, phi0_, t);
  }
  if (t == 0.0) return phi0_;
  // restart from the last stored grid node at or before t
  double t0 = 0.0;
  double u = std::log(1.0 / phi0_);
  auto it = std::upper_bound(times_.begin(), times_.end(), t);
  if (it != times_.begin()) {
    const auto idx = static_cast<std::size_t>(it - times_.begin()) - 1;
    t0 = times_[idx];
    u = std::log(1.0 / values_[idx]);
  }
  Stepper stepper(modulus_, c_p_);
  if (auto exit = stepper.advance(u, t0, t)) {
    throw DomainError(fmt::format("phi leaves ]0, delta_o] at t = {}", *exit));
  }
  return std::exp(-u);
}

FeasibilityProbe kolmogorov_feasibility_probe(std::span<const double> log_inv_phi0,
                                              double c_p, double t) {
  if (!(c_p > 0.0)) throw ParameterError(fmt::format("C_p must be positive, got {}", c_p));
  if (!(t >= 0.0)) throw ParameterError(fmt::format("t must be >= 0, got {}", t));
  FeasibilityProbe probe;
  probe.c_p = c_p;
  probe.t = t;
  const double exponent = std::exp(-c_p * t);
  probe.log_exponent = exponent;
  for (std::size_t i = 0; i < log_inv_phi0.size(); ++i) {
    const double l = log_inv_phi0[i];
    if (!(l > 1.0)) {
      throw GridError(fmt::format("log(1/phi0) must exceed 1, got {}", l));
    }
    if (i > 0 && !(l > log_inv_phi0[i - 1])) {
      throw GridError("phi0 grid must decrease strictly toward 0");
    }
    probe.log_inv_phi0.push_back(l);
    probe.loglog_ratio.push_back(std::exp((exponent - 1.0) * std::log(l)));
  }
  probe.loglog_ratio_decreasing = probe.loglog_ratio.size() >= 2;
  for (std::size_t i = 1; i < probe.loglog_ratio.size(); ++i) {
    if (!(probe.loglog_ratio[i] < probe.loglog_ratio[i - 1])) probe.loglog_ratio_decreasing = false;
  }
  return probe;
}

}  // namespace nlflow
