#include "nlflow/modulus.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "nlflow/errors.hpp"
#include "nlflow/quadrature.hpp"

namespace nlflow {

std::string_view to_string(ModulusFamily family) {
  switch (family) {
    case ModulusFamily::Log: return "Log";
    case ModulusFamily::LogLog: return "LogLog";
    case ModulusFamily::Constant: return "Constant";
    case ModulusFamily::Tabulated: return "Tabulated";
  }
  return "?";
}

ModulusFamily modulus_family_from_string(std::string_view name) {
  if (name == "Log") return ModulusFamily::Log;
  if (name == "LogLog") return ModulusFamily::LogLog;
  if (name == "Constant") return ModulusFamily::Constant;
  if (name == "Tabulated") return ModulusFamily::Tabulated;
  throw UnknownNameError(fmt::format("unknown modulus family '{}'", name));
}

ModulusSpec::ModulusSpec(ModulusFamily family, double delta_o, double scale)
    : family_(family), delta_o_(delta_o), scale_(scale) {
  if (!(delta_o > 0.0) || !std::isfinite(delta_o)) {
    throw ParameterError(fmt::format("delta_o must be positive, got {}", delta_o));
  }
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    throw ParameterError(fmt::format("modulus scale must be positive, got {}", scale));
  }
  switch (family) {
    case ModulusFamily::Log:
      if (delta_o >= 1.0) {
        throw FamilyError(fmt::format(
            "Log modulus needs delta_o < 1 to stay positive, got {}", delta_o));
      }
      break;
    case ModulusFamily::LogLog:
      if (delta_o > kLogLogDeltaMax) {
        throw FamilyError(fmt::format(
            "LogLog modulus needs delta_o <= 1/(2e), got {}", delta_o));
      }
      break;
    case ModulusFamily::Constant:
      break;
    case ModulusFamily::Tabulated:
      throw FamilyError("tabulated moduli are built with ModulusSpec::tabulated");
  }
}

ModulusSpec::ModulusSpec(double delta_o, std::shared_ptr<const Table> table)
    : family_(ModulusFamily::Tabulated),
      delta_o_(delta_o),
      scale_(1.0),
      table_(std::move(table)) {}

ModulusSpec ModulusSpec::log(double scale, double delta_o) {
  return {ModulusFamily::Log, delta_o, scale};
}

ModulusSpec ModulusSpec::log_log(double scale) {
  return {ModulusFamily::LogLog, kLogLogDeltaMax, scale};
}

ModulusSpec ModulusSpec::constant(double value, double delta_o) {
  return {ModulusFamily::Constant, delta_o, value};
}

ModulusSpec ModulusSpec::tabulated(std::vector<double> s, std::vector<double> r,
                                   double delta_o) {
  if (s.size() != r.size() || s.size() < 2) {
    throw ParameterError("tabulated modulus needs >= 2 (s, r) pairs of equal length");
  }
  if (!(delta_o > 0.0)) {
    throw ParameterError("delta_o must be positive");
  }
  auto table = std::make_shared<Table>();
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (!(s[i] > 0.0) || !(r[i] > 0.0)) {
      throw ParameterError("tabulated modulus needs s > 0 and r > 0");
    }
    if (i > 0 && !(s[i] > s[i - 1])) {
      throw ParameterError("tabulated s values must be strictly increasing");
    }
    table->log_s.push_back(std::log(s[i]));
    table->log_r.push_back(std::log(r[i]));
  }
  return ModulusSpec(delta_o, std::move(table));
}

double ModulusSpec::value_unchecked(double s) const noexcept {
  switch (family_) {
    case ModulusFamily::Log:
      return scale_ * std::log(1.0 / s);
    case ModulusFamily::LogLog: {
      const double l = std::log(1.0 / s);
      return scale_ * l * std::log(l);
    }
    case ModulusFamily::Constant:
      return scale_;
    case ModulusFamily::Tabulated: {
      const auto& ls = table_->log_s;
      const auto& lr = table_->log_r;
      const double x = std::log(s);
      // segment index, clamped so the end segments extrapolate
      auto it = std::upper_bound(ls.begin(), ls.end(), x);
      std::size_t hi = static_cast<std::size_t>(it - ls.begin());
      hi = std::clamp<std::size_t>(hi, 1, ls.size() - 1);
      const std::size_t lo = hi - 1;
      const double w = (x - ls[lo]) / (ls[hi] - ls[lo]);
      return std::exp(lr[lo] + w * (lr[hi] - lr[lo]));
    }
  }
  return 0.0;
}

double ModulusSpec::operator()(double s) const {
  if (!(s > 0.0) || s > delta_o_) {
    throw DomainError(fmt::format("modulus argument {} outside ]0, {}]", s, delta_o_));
  }
  return value_unchecked(s);
}

double ModulusSpec::derivative(double s) const {
  if (!(s > 0.0) || s > delta_o_) {
    throw DomainError(fmt::format("modulus argument {} outside ]0, {}]", s, delta_o_));
  }
  switch (family_) {
    case ModulusFamily::Log:
      return -scale_ / s;
    case ModulusFamily::LogLog: {
      const double l = std::log(1.0 / s);
      return -scale_ * (std::log(l) + 1.0) / s;
    }
    case ModulusFamily::Constant:
      return 0.0;
    case ModulusFamily::Tabulated: {
      const double h = s * 1e-6;
      return (value_unchecked(s + h) - value_unchecked(s - h)) / (2.0 * h);
    }
  }
  return 0.0;
}

std::span<const double> ModulusSpec::table_log_s() const noexcept {
  if (!table_) return {};
  return table_->log_s;
}

std::span<const double> ModulusSpec::table_log_r() const noexcept {
  if (!table_) return {};
  return table_->log_r;
}

std::optional<bool> ModulusSpec::analytic_divergence() const noexcept {
  if (family_ == ModulusFamily::Tabulated) return std::nullopt;
  return true;
}

double eval_modulus(const ModulusSpec& spec, double s) { return spec(s); }

std::vector<double> geometric_grid(double hi, double lo, std::size_t n) {
  if (!(hi > 0.0) || !(lo > 0.0) || n < 2) {
    throw GridError("geometric grid needs positive bounds and n >= 2");
  }
  std::vector<double> g(n);
  const double lhi = std::log(hi);
  const double llo = std::log(lo);
  for (std::size_t i = 0; i < n; ++i) {
    g[i] = std::exp(lhi + (llo - lhi) * static_cast<double>(i) / static_cast<double>(n - 1));
  }
  g.front() = hi;
  g.back() = lo;
  return g;
}

namespace {

// Integral of ds/(s r(s)) over [s, delta_o], computed in u = log(1/s).
double partial_integral(const ModulusSpec& spec, double s) {
  const double u_lo = std::log(1.0 / spec.delta_o());
  const double u_hi = std::log(1.0 / s);
  return adaptive_simpson(
             [&](double u) { return 1.0 / spec.value_unchecked(std::exp(-u)); },
             u_lo, u_hi, 1e-10)
      .value;
}

}  // namespace

ModulusConditionReport check_modulus_conditions(const ModulusSpec& spec,
                                                std::span<const double> grid,
                                                const ModulusConditionOptions& options) {
  if (grid.size() < 10) {
    throw GridError(fmt::format("modulus condition grid needs >= 10 points, got {}",
                                grid.size()));
  }
  std::vector<double> s(grid.begin(), grid.end());
  std::sort(s.begin(), s.end(), std::greater<>());
  for (double v : s) {
    if (!(v > 0.0) || v > spec.delta_o()) {
      throw GridError(fmt::format("grid point {} outside ]0, {}]", v, spec.delta_o()));
    }
  }
  if (std::log10(s.front() / s.back()) < 6.0 - 1e-9) {
    throw GridError("modulus condition grid must span at least 6 decades");
  }

  ModulusConditionReport rep;
  const std::size_t tail_start = s.size() / 2;

  // (i): strictly increasing along the tail as s decreases
  bool increasing = true;
  for (std::size_t k = tail_start + 1; k < s.size(); ++k) {
    if (!(spec(s[k]) > spec(s[k - 1]) * (1.0 + 1e-12))) increasing = false;
  }
  rep.unbounded_growth = increasing;

  // (ii)
  const double floor = s.back();
  rep.partial_integral = partial_integral(spec, floor);
  const double i1 = partial_integral(spec, 10.0 * floor);
  const double i2 = partial_integral(spec, 100.0 * floor);
  const double d_near = rep.partial_integral - i1;
  const double d_far = i1 - i2;
  rep.decade_increment_ratio = d_far > 0.0 ? d_near / d_far : 0.0;
  rep.numeric_divergence = rep.partial_integral > options.divergence_threshold ||
                           rep.decade_increment_ratio >= options.decade_ratio_cutoff;
  if (auto analytic = spec.analytic_divergence()) {
    rep.integral_diverges = *analytic;
    rep.divergence_heuristic = false;
  } else {
    rep.integral_diverges = rep.numeric_divergence;
    rep.divergence_heuristic = true;
  }

  // (iii)
  auto ratio = [&](double v) { return v * spec.derivative(v) / spec(v); };
  bool shrinking = true;
  for (std::size_t k = tail_start + 1; k < s.size(); ++k) {
    if (std::abs(ratio(s[k])) > std::abs(ratio(s[k - 1])) + 1e-12) shrinking = false;
  }
  rep.tail_ratio = ratio(floor);
  rep.ratio_vanishes = shrinking && std::abs(rep.tail_ratio) <= options.ratio_tolerance;

  if (spec.family() == ModulusFamily::Constant) {
    rep.note = "bounded modulus (Lipschitz baseline); integral diverges like log";
  } else if (rep.divergence_heuristic) {
    rep.note = "condition (ii) decided by numeric heuristic";
  }
  return rep;
}

GrowthSpec GrowthSpec::constant(double value) {
  if (!(value >= 0.0) || !std::isfinite(value)) {
    throw ParameterError(fmt::format("constant growth must be >= 0, got {}", value));
  }
  return {Kind::Constant, value};
}

GrowthSpec GrowthSpec::logarithmic() { return {Kind::Logarithmic, 0.0}; }

double GrowthSpec::rho(double s) const {
  if (!(s >= 1.0)) throw DomainError(fmt::format("rho needs s >= 1, got {}", s));
  return f(s);
}

double GrowthSpec::f(double s) const {
  if (!(s >= 0.0)) throw DomainError(fmt::format("f needs s >= 0, got {}", s));
  if (kind_ == Kind::Constant) return value_;
  if (s >= 1.0) return 1.0 + std::log(s);
  return 0.5 * (1.0 + s * s);
}

std::string GrowthSpec::describe() const {
  if (kind_ == Kind::Constant) return fmt::format("Constant({})", value_);
  return "Logarithmic";
}

bool check_growth_invariants(const GrowthSpec& growth, double s_max, std::size_t samples) {
  for (std::size_t i = 0; i <= samples; ++i) {
    const double s = s_max * static_cast<double>(i) / static_cast<double>(samples);
    if (!(growth.f(s) > 0.0)) return false;
    if (s >= 1.0 && growth.f(s) != growth.rho(s)) return false;
  }
  return true;
}

}  // namespace nlflow
