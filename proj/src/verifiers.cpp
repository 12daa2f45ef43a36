#include "nlflow/verifiers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "nlflow/errors.hpp"
#include "nlflow/flow.hpp"
#include "nlflow/lyapunov.hpp"
#include "nlflow/stats.hpp"

namespace nlflow {

using json = nlohmann::ordered_json;

std::string_view to_string(Verdict verdict) {
  switch (verdict) {
    case Verdict::Pass: return "pass";
    case Verdict::Fail: return "fail";
    case Verdict::ReportOnly: return "report-only";
  }
  return "?";
}

json CheckReport::to_json() const {
  json j;
  j["check"] = check;
  j["field"] = field;
  j["params"] = params;
  j["statistics"] = statistics;
  j["verdict"] = std::string(nlflow::to_string(verdict));
  return j;
}

void write_estimates_csv(const std::vector<EstimateRow>& rows, std::ostream& out) {
  out << "t,separation_or_x0,estimate,ci_halfwidth,n\n";
  for (const auto& r : rows) {
    fmt::print(out, "{},{},{},{},{}\n", r.t, r.separation_or_x0, r.estimate,
               r.ci_halfwidth, r.n);
  }
}

double default_delta_floor(const CoefficientField& field, double fallback_radius) {
  const double r = field.support_radius.value_or(fallback_radius);
  return 1e-3 * (r + 1.0);
}

namespace {

struct Grid {
  double horizon;
  std::size_t n_steps;
  double dt;
};

Grid time_grid(double horizon, double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ParameterError(fmt::format("dt must be positive, got {}", dt));
  if (!(horizon >= 0.0) || !std::isfinite(horizon)) {
    throw ParameterError(fmt::format("horizon must be nonnegative, got {}", horizon));
  }
  if (horizon == 0.0) return {dt, 1, dt};
  const auto n = static_cast<std::size_t>(std::max(1.0, std::round(horizon / dt)));
  return {horizon, n, horizon / static_cast<double>(n)};
}

std::size_t step_of(const Grid& g, double t) {
  return static_cast<std::size_t>(std::llround(t / g.dt));
}

std::size_t record_index(const FlowEnsemble& ens, std::size_t step) {
  auto it = std::lower_bound(ens.steps.begin(), ens.steps.end(), step);
  return static_cast<std::size_t>(it - ens.steps.begin());
}

FlowEnsemble run_replication(const CoefficientField& field, const std::vector<Point>& points,
                             std::uint64_t seed, const Grid& g,
                             const SimulationOptions& options) {
  const BrownianPath path = generate_path(seed, g.dt, g.n_steps, field.dim_noise);
  return simulate_ensemble(field, points, path, Scheme::EulerMaruyama, options);
}

/// Replications are identical when the field has no diffusion, so only the
/// first one is simulated.
template <typename T>
std::vector<T> replicate(const CoefficientField& field, std::size_t n,
                         const std::function<T(std::size_t)>& fn) {
  if (field.diffusion_free) {
    T first = fn(0);
    return std::vector<T>(n, first);
  }
  return stats::parallel_map<T>(n, fn);
}

void check_point(const CoefficientField& field, const Point& p, std::string_view what) {
  if (p.size() != field.dim_state) {
    throw ParameterError(fmt::format("{} has dimension {}, field {} has dimension {}", what,
                                     p.size(), field.name, field.dim_state));
  }
  for (double v : p) {
    if (!std::isfinite(v)) throw ParameterError(fmt::format("{} must be finite", what));
  }
}

void check_replications(const McSettings& mc) {
  if (mc.n_replications < 2) {
    throw ParameterError(
        fmt::format("at least 2 replications are required, got {}", mc.n_replications));
  }
}

double squared_distance(const Point& a, const Point& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return s;
}

double distance_power(double d2, double power) {
  if (d2 == 0.0) return power > 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return std::pow(d2, 0.5 * power);
}

bool all_equal(const std::vector<double>& v) {
  return std::all_of(v.begin(), v.end(), [&](double x) { return x == v.front(); });
}

json field_json(const CoefficientField& field) {
  json p = json::object();
  for (const auto& [k, v] : field.params) p[k] = v;
  return p;
}

json mc_json(const McSettings& mc) {
  return json{{"n_replications", mc.n_replications}, {"dt", mc.dt}, {"seed0", mc.seed0}};
}

json point_json(const Point& p) { return json(p); }

}  // namespace

MomentReport estimate_pair_moment(const CoefficientField& field, const Point& x0, const Point& y0,
                                  double power, double t, const McSettings& mc,
                                  std::optional<double> delta_floor) {
  check_point(field, x0, "x0");
  check_point(field, y0, "y0");
  if (x0 == y0) throw ParameterError("degenerate pair: x0 == y0");
  check_replications(mc);
  if (!(power != 0.0) || !std::isfinite(power)) {
    throw ParameterError(fmt::format("moment power must be finite and nonzero, got {}", power));
  }
  if (!(t >= 0.0)) throw ParameterError(fmt::format("time must be nonnegative, got {}", t));
  if (power < 0.0) {
    const double floor = delta_floor.value_or(
        default_delta_floor(field, std::max(euclidean_norm(x0), euclidean_norm(y0))));
    const double sep = std::sqrt(squared_distance(x0, y0));
    if (sep < floor) {
      throw ParameterError(fmt::format(
          "negative moments need |x0 - y0| >= delta = {}, got {}", floor, sep));
    }
  }

  const Grid g = time_grid(t, mc.dt);
  SimulationOptions opts;
  opts.record_steps = {step_of(g, t)};
  const std::vector<Point> points{x0, y0};
  auto values = replicate<double>(field, mc.n_replications, [&](std::size_t r) {
    const FlowEnsemble ens = run_replication(field, points, mc.seed0 + r, g, opts);
    return pair_squared_distance(ens, ens.n_records() - 1, 0, 1);
  });

  MomentReport rep;
  rep.functional = power > 0.0 ? "power" : "negative-power";
  rep.power = power;
  rep.t = t;
  rep.n_replications = mc.n_replications;
  for (double& v : values) {
    if (v == 0.0) ++rep.contacts;
    v = distance_power(v, power);
  }
  const auto s = stats::summarize(values);
  rep.estimate = s.mean;
  rep.ci_halfwidth = s.ci_halfwidth;
  rep.degenerate = all_equal(values);
  return rep;
}

std::vector<HolderFit> fit_holder_exponent(const CoefficientField& field, const Point& base,
                                           const std::vector<double>& separations, double power,
                                           const std::vector<double>& t_grid,
                                           const McSettings& mc) {
  check_point(field, base, "base point");
  check_replications(mc);
  if (!(power > 0.0)) throw ParameterError(fmt::format("power must be positive, got {}", power));
  if (separations.size() < 4) {
    throw GridError(fmt::format("need at least 4 separations, got {}", separations.size()));
  }
  const double limit = std::sqrt(field.modulus.delta_o());
  for (double s : separations) {
    if (!(s > 0.0) || s > limit * (1.0 + 1e-12)) {
      throw GridError(fmt::format("separation {} outside ]0, sqrt(delta_o) = {}]", s, limit));
    }
  }
  const auto [lo, hi] = std::minmax_element(separations.begin(), separations.end());
  if (*hi / *lo < 1e3 * (1.0 - 1e-9)) {
    throw GridError(fmt::format("separations span {:.3g} decades, at least 3 required",
                                std::log10(*hi / *lo)));
  }
  if (t_grid.empty()) throw GridError("time grid is empty");
  for (double t : t_grid) {
    if (!(t >= 0.0)) throw GridError(fmt::format("negative time {} in the grid", t));
  }

  const Grid g = time_grid(*std::max_element(t_grid.begin(), t_grid.end()), mc.dt);
  SimulationOptions opts;
  for (double t : t_grid) opts.record_steps.push_back(step_of(g, t));
  std::vector<Point> points{base};
  for (double s : separations) {
    Point p = base;
    p[0] += s;
    points.push_back(std::move(p));
  }
  const std::size_t n_sep = separations.size();

  auto samples = replicate<std::vector<double>>(field, mc.n_replications, [&](std::size_t r) {
    const FlowEnsemble ens = run_replication(field, points, mc.seed0 + r, g, opts);
    std::vector<double> out;
    out.reserve(t_grid.size() * n_sep);
    for (double t : t_grid) {
      const std::size_t rec = record_index(ens, step_of(g, t));
      for (std::size_t k = 0; k < n_sep; ++k) {
        out.push_back(distance_power(pair_squared_distance(ens, rec, 0, k + 1), power));
      }
    }
    return out;
  });

  std::vector<HolderFit> fits;
  std::vector<double> column(mc.n_replications);
  for (std::size_t ti = 0; ti < t_grid.size(); ++ti) {
    HolderFit fit;
    fit.t = t_grid[ti];
    fit.power = power;
    fit.separations = separations;
    std::vector<double> lx, ly;
    for (std::size_t k = 0; k < n_sep; ++k) {
      for (std::size_t r = 0; r < mc.n_replications; ++r) column[r] = samples[r][ti * n_sep + k];
      const auto s = stats::summarize(column);
      fit.moments.push_back(s.mean);
      fit.ci_halfwidths.push_back(all_equal(column) ? 0.0 : s.ci_halfwidth);
      if (!(s.mean > 0.0) || !std::isfinite(s.mean)) {
        throw RegressionError(fmt::format("moment {} at t = {}, separation {} cannot be log-fitted",
                                          s.mean, fit.t, separations[k]));
      }
      lx.push_back(std::log(separations[k]));
      ly.push_back(std::log(s.mean));
    }
    const auto ols = stats::ordinary_least_squares(lx, ly);
    fit.slope = ols.slope;
    fit.intercept = ols.intercept;
    fit.r_squared = ols.r_squared;
    fits.push_back(std::move(fit));
  }
  return fits;
}

HolderCheck check_holder(const CoefficientField& field, const Point& base,
                         const std::vector<double>& separations, double power,
                         const std::vector<double>& t_grid, const McSettings& mc) {
  std::vector<double> ts = t_grid;
  std::sort(ts.begin(), ts.end());
  if (std::adjacent_find(ts.begin(), ts.end()) != ts.end()) {
    throw GridError("time grid has repeated values");
  }
  HolderCheck out;
  out.fits = fit_holder_exponent(field, base, separations, power, ts, mc);

  double num = 0.0, den = 0.0;
  for (const auto& f : out.fits) {
    if (f.t > 0.0 && f.slope > 0.0) {
      num -= f.t * std::log(f.slope / power);
      den += f.t * f.t;
    }
  }
  out.fitted_c_p = den > 0.0 ? num / den : 0.0;

  const bool lipschitz = field.modulus.family() == ModulusFamily::Constant;
  bool ok = true;
  if (lipschitz) {
    for (const auto& f : out.fits) ok = ok && std::abs(f.slope - power) <= 0.05 * power;
  } else {
    if (out.fits.front().t == 0.0) {
      ok = std::abs(out.fits.front().slope - power) <= 0.05 * power;
    }
    for (std::size_t i = 1; i < out.fits.size(); ++i) {
      ok = ok && out.fits[i].slope < out.fits[i - 1].slope;
    }
  }

  CheckReport& rep = out.report;
  rep.check = "holder";
  rep.field = field.name;
  rep.params = json{{"field_params", field_json(field)},
                    {"base", point_json(base)},
                    {"separations", separations},
                    {"power", power},
                    {"t_grid", ts},
                    {"mc", mc_json(mc)}};
  json slopes = json::array(), r2 = json::array(), predicted = json::array();
  for (const auto& f : out.fits) {
    slopes.push_back(f.slope);
    r2.push_back(f.r_squared);
    predicted.push_back(power * std::exp(-out.fitted_c_p * f.t));
    for (std::size_t k = 0; k < f.separations.size(); ++k) {
      rep.rows.push_back({f.t, f.separations[k], f.moments[k], f.ci_halfwidths[k],
                          mc.n_replications});
    }
  }
  rep.statistics = json{{"mode", lipschitz ? "flat" : "decaying"},
                        {"slopes", slopes},
                        {"r_squared", r2},
                        {"fitted_c_p", out.fitted_c_p},
                        {"fitted_slopes", predicted}};
  rep.verdict = ok ? Verdict::Pass : Verdict::Fail;
  return out;
}

TimeRegularityCheck check_time_regularity(const CoefficientField& field, const Point& x0,
                                          double power,
                                          const std::vector<std::pair<double, double>>& times,
                                          const McSettings& mc) {
  check_point(field, x0, "x0");
  check_replications(mc);
  if (!field.support_radius) {
    throw ParameterError(fmt::format("time regularity needs a compactly supported field; {} is not",
                                     field.name));
  }
  if (!(power > 0.0)) throw ParameterError(fmt::format("power must be positive, got {}", power));
  if (times.size() < 2) throw GridError("need at least two time pairs");
  double horizon = 0.0;
  for (const auto& [s, t] : times) {
    if (!(s >= 0.0) || !(t >= 0.0) || s == t) {
      throw GridError(fmt::format("invalid time pair ({}, {})", s, t));
    }
    horizon = std::max({horizon, s, t});
  }
  const Grid g = time_grid(horizon, mc.dt);
  SimulationOptions opts;
  for (const auto& [s, t] : times) {
    opts.record_steps.push_back(step_of(g, s));
    opts.record_steps.push_back(step_of(g, t));
  }
  const std::vector<Point> points{x0};
  auto samples = replicate<std::vector<double>>(field, mc.n_replications, [&](std::size_t r) {
    const FlowEnsemble ens = run_replication(field, points, mc.seed0 + r, g, opts);
    std::vector<double> out;
    for (const auto& [s, t] : times) {
      const auto a = ens.state(record_index(ens, step_of(g, s)), 0);
      const auto b = ens.state(record_index(ens, step_of(g, t)), 0);
      double d2 = 0.0;
      for (std::size_t c = 0; c < a.size(); ++c) d2 += (a[c] - b[c]) * (a[c] - b[c]);
      out.push_back(distance_power(d2, power));
    }
    return out;
  });

  TimeRegularityCheck out;
  CheckReport& rep = out.report;
  std::vector<double> column(mc.n_replications), lx, ly;
  for (std::size_t i = 0; i < times.size(); ++i) {
    for (std::size_t r = 0; r < mc.n_replications; ++r) column[r] = samples[r][i];
    const auto s = stats::summarize(column);
    const double lag = std::abs(times[i].second - times[i].first);
    out.lags.push_back(lag);
    out.moments.push_back(s.mean);
    rep.rows.push_back({std::max(times[i].first, times[i].second), lag, s.mean,
                        all_equal(column) ? 0.0 : s.ci_halfwidth, mc.n_replications});
    if (s.mean > 0.0 && std::isfinite(s.mean)) {
      lx.push_back(std::log(lag));
      ly.push_back(std::log(s.mean));
    }
  }
  std::optional<double> r2;
  if (lx.size() >= 2 && std::adjacent_find(lx.begin(), lx.end(), std::not_equal_to<>()) != lx.end()) {
    const auto fit = stats::ordinary_least_squares(lx, ly);
    out.slope = fit.slope;
    r2 = fit.r_squared;
  } else {
    out.degenerate = true;
  }

  const double required = 0.5 * power - 0.2;
  rep.check = "time-regularity";
  rep.field = field.name;
  json tp = json::array();
  for (const auto& [s, t] : times) tp.push_back(json::array({s, t}));
  rep.params = json{{"field_params", field_json(field)},
                    {"x0", point_json(x0)},
                    {"power", power},
                    {"time_pairs", tp},
                    {"mc", mc_json(mc)}};
  rep.statistics = json{{"degenerate", out.degenerate},
                        {"slope", out.slope ? json(*out.slope) : json(nullptr)},
                        {"r_squared", r2 ? json(*r2) : json(nullptr)},
                        {"required_slope", required},
                        {"moments", out.moments},
                        {"lags", out.lags}};
  if (out.degenerate) {
    rep.verdict = Verdict::ReportOnly;
  } else {
    rep.verdict = *out.slope >= required ? Verdict::Pass : Verdict::Fail;
  }
  return out;
}

NonconfluenceCheck check_nonconfluence(const CoefficientField& field,
                                       const std::vector<std::pair<Point, Point>>& pairs,
                                       double horizon, const std::vector<double>& eps_grid,
                                       const McSettings& mc) {
  check_replications(mc);
  if (pairs.empty()) throw ParameterError("no pairs given");
  if (eps_grid.empty()) throw GridError("eps grid is empty");
  if (!(horizon > 0.0)) throw ParameterError(fmt::format("horizon must be positive, got {}", horizon));
  std::vector<Point> points;
  std::vector<double> xi0;
  for (const auto& [x, y] : pairs) {
    check_point(field, x, "pair point");
    check_point(field, y, "pair point");
    if (x == y) throw ParameterError("degenerate pair: both points coincide");
    points.push_back(x);
    points.push_back(y);
    xi0.push_back(squared_distance(x, y));
  }
  NonconfluenceCheck out;
  out.eps_grid = eps_grid;
  std::sort(out.eps_grid.begin(), out.eps_grid.end(), std::greater<>());
  for (double e : out.eps_grid) {
    if (!(e > 0.0)) throw GridError(fmt::format("eps must be positive, got {}", e));
    for (double x : xi0) {
      if (!(e < x)) {
        throw OrderingError(fmt::format("eps {} is not below the initial squared distance {}", e, x));
      }
    }
  }

  struct Rep {
    std::vector<double> min_xi;
    std::size_t contacts = 0;
    std::size_t pair_steps = 0;
  };
  const Grid g = time_grid(horizon, mc.dt);
  const std::size_t n_pairs = pairs.size();
  auto reps = replicate<Rep>(field, mc.n_replications, [&](std::size_t r) {
    const FlowEnsemble ens = run_replication(field, points, mc.seed0 + r, g, {});
    Rep rep;
    rep.min_xi.assign(n_pairs, std::numeric_limits<double>::infinity());
    for (std::size_t p = 0; p < n_pairs; ++p) {
      bool contact = false;
      for (std::size_t k = 0; k < ens.n_records(); ++k) {
        const double xi = pair_squared_distance(ens, k, 2 * p, 2 * p + 1);
        rep.min_xi[p] = std::min(rep.min_xi[p], xi);
        contact = contact || xi == 0.0;
      }
      rep.pair_steps += ens.n_records();
      if (contact) ++rep.contacts;
    }
    return rep;
  });

  const double n = static_cast<double>(mc.n_replications);
  for (const auto& rp : reps) {
    out.exact_contacts += rp.contacts;
    out.pair_steps += rp.pair_steps;
  }
  const ContactTransform transform{field.modulus};
  const bool log_type = field.modulus.family() == ModulusFamily::Log ||
                        field.modulus.family() == ModulusFamily::LogLog;
  const double derived_c = 4.0 * field.modulus_constant;
  CheckReport& rep = out.report;
  json per_pair = json::array();
  for (std::size_t p = 0; p < n_pairs; ++p) {
    std::vector<double> freq;
    for (double e : out.eps_grid) {
      std::size_t hits = 0;
      for (const auto& rp : reps) hits += rp.min_xi[p] <= e ? 1 : 0;
      const double f = static_cast<double>(hits) / n;
      freq.push_back(f);
      rep.rows.push_back({horizon, e, f, stats::proportion_halfwidth(f, mc.n_replications),
                          mc.n_replications});
    }
    for (std::size_t k = 1; k < freq.size(); ++k) out.monotone = out.monotone && freq[k] <= freq[k - 1];

    json entry{{"xi0", xi0[p]}, {"frequencies", freq}};
    std::optional<double> env, ls;
    if (xi0[p] <= field.modulus.delta_o()) {
      std::vector<double> ratio, needed;
      for (std::size_t k = 0; k < freq.size(); ++k) {
        ratio.push_back(std::exp(psi_contact(transform, xi0[p]) -
                                 psi_contact(transform, out.eps_grid[k])));
        if (freq[k] > 0.0) needed.push_back(std::log(freq[k] / ratio.back()) / horizon);
      }
      env = 0.0;
      for (double c : needed) env = std::max(*env, c);
      if (!needed.empty()) {
        ls = stats::pairwise_sum(needed) / static_cast<double>(needed.size());
      }
      std::vector<double> bound_env, bound_derived;
      bool below = true;
      for (std::size_t k = 0; k < freq.size(); ++k) {
        bound_env.push_back(
            noncontact_probability_bound(transform, xi0[p], out.eps_grid[k], *env, horizon));
        below = below && freq[k] <= bound_env.back();
        if (log_type) {
          bound_derived.push_back(noncontact_probability_bound(transform, xi0[p],
                                                               out.eps_grid[k], derived_c, horizon));
        }
      }
      entry["phi_ratio"] = ratio;
      entry["envelope_c"] = *env;
      entry["least_squares_c"] = ls ? json(*ls) : json(nullptr);
      entry["bound_at_envelope_c"] = bound_env;
      entry["frequencies_below_bound"] = below;
      if (log_type) {
        entry["derived_c"] = derived_c;
        entry["bound_at_derived_c"] = bound_derived;
      }
    } else {
      entry["bound"] = "undefined: xi0 exceeds delta_o";
    }
    out.frequencies.push_back(std::move(freq));
    out.envelope_c.push_back(env);
    out.least_squares_c.push_back(ls);
    per_pair.push_back(std::move(entry));
  }

  rep.check = "nonconfluence";
  rep.field = field.name;
  json pj = json::array();
  for (const auto& [x, y] : pairs) pj.push_back(json::array({point_json(x), point_json(y)}));
  rep.params = json{{"field_params", field_json(field)},
                    {"pairs", pj},
                    {"horizon", horizon},
                    {"eps_grid", out.eps_grid},
                    {"mc", mc_json(mc)}};
  rep.statistics = json{{"exact_contacts", out.exact_contacts},
                        {"pair_steps", out.pair_steps},
                        {"frequencies_nonincreasing", out.monotone},
                        {"pairs", per_pair}};
  rep.verdict = out.exact_contacts == 0 && out.monotone ? Verdict::Pass : Verdict::Fail;
  return out;
}

EscapeCheck check_escape(const CoefficientField& field, const std::vector<double>& x0_norms,
                         double radius, double horizon, const McSettings& mc) {
  check_replications(mc);
  if (!(radius > 0.0)) throw ParameterError(fmt::format("radius R must be positive, got {}", radius));
  if (!(horizon > 0.0)) throw ParameterError(fmt::format("horizon must be positive, got {}", horizon));
  if (x0_norms.empty()) throw GridError("|x0| grid is empty");
  EscapeCheck out;
  out.x0_norms = x0_norms;
  std::sort(out.x0_norms.begin(), out.x0_norms.end());
  for (double v : out.x0_norms) {
    if (!(v > radius)) {
      throw OrderingError(fmt::format("|x0| = {} must exceed R = {}", v, radius));
    }
  }
  std::vector<Point> points;
  for (double v : out.x0_norms) {
    Point p(field.dim_state, 0.0);
    p[0] = v;
    points.push_back(std::move(p));
  }
  const Grid g = time_grid(horizon, mc.dt);
  auto hits = replicate<std::vector<double>>(field, mc.n_replications, [&](std::size_t r) {
    const FlowEnsemble ens = run_replication(field, points, mc.seed0 + r, g, {});
    std::vector<double> h;
    for (std::size_t i = 0; i < points.size(); ++i) {
      h.push_back(hitting_time(ens, HittingQuery::ball_entry(i, radius)).time ? 1.0 : 0.0);
    }
    return h;
  });

  const std::size_t k_n = out.x0_norms.size();
  for (std::size_t i = 0; i < k_n; ++i) {
    double c = 0.0;
    for (const auto& h : hits) c += h[i];
    const double p = c / static_cast<double>(mc.n_replications);
    out.probabilities.push_back(p);
    out.ci_halfwidths.push_back(stats::proportion_halfwidth(p, mc.n_replications));
  }
  for (std::size_t i = 1; i < k_n; ++i) {
    out.monotone = out.monotone &&
                   out.probabilities[i] <= out.probabilities[i - 1] + out.ci_halfwidths[i] +
                                               out.ci_halfwidths[i - 1] + 1e-12;
  }

  json integrals = json::array();
  if (field.growth) {
    const EscapeTransform transform{*field.growth};
    double env = 0.0;
    std::vector<double> integral;
    for (std::size_t i = 0; i < k_n; ++i) {
      integral.push_back(escape_integral(transform, radius * radius,
                                         out.x0_norms[i] * out.x0_norms[i]));
      integrals.push_back(integral.back());
      if (out.probabilities[i] > 0.0) {
        env = std::max(env, (std::log(out.probabilities[i]) + integral.back()) / horizon);
      }
    }
    out.envelope_c = env;
    for (std::size_t i = 0; i < k_n; ++i) {
      out.bounds.push_back(escape_probability_bound(transform, out.x0_norms[i], radius, env, horizon));
    }
  } else {
    out.bounds.assign(k_n, std::nullopt);
  }

  CheckReport& rep = out.report;
  rep.check = "escape";
  rep.field = field.name;
  rep.params = json{{"field_params", field_json(field)},
                    {"x0_norms", out.x0_norms},
                    {"radius", radius},
                    {"horizon", horizon},
                    {"mc", mc_json(mc)}};
  json bounds = json::array();
  for (const auto& b : out.bounds) bounds.push_back(b ? json(*b) : json(nullptr));
  rep.statistics = json{{"probabilities", out.probabilities},
                        {"ci_halfwidths", out.ci_halfwidths},
                        {"nonincreasing_within_ci", out.monotone},
                        {"growth", field.growth ? json(field.growth->describe()) : json(nullptr)},
                        {"escape_integrals", integrals},
                        {"envelope_c", out.envelope_c ? json(*out.envelope_c) : json(nullptr)},
                        {"bound_at_envelope_c", bounds}};
  for (std::size_t i = 0; i < k_n; ++i) {
    rep.rows.push_back({horizon, out.x0_norms[i], out.probabilities[i], out.ci_halfwidths[i],
                        mc.n_replications});
  }
  rep.verdict = out.monotone ? Verdict::Pass : Verdict::Fail;
  return out;
}

HomeomorphismCheck check_homeomorphism_grid(const CoefficientField& field,
                                            const std::vector<Point>& grid, double horizon,
                                            double dt, std::uint64_t seed,
                                            std::optional<double> delta) {
  if (grid.size() < 2) throw GridError("grid needs at least two points");
  double max_norm = 0.0;
  for (const auto& p : grid) {
    check_point(field, p, "grid point");
    max_norm = std::max(max_norm, euclidean_norm(p));
  }
  const std::size_t n = grid.size();
  const bool one_d = field.dim_state == 1;
  if (one_d) {
    for (std::size_t i = 1; i < n; ++i) {
      if (!(grid[i][0] > grid[i - 1][0])) {
        throw GridError(fmt::format("1D grid must be strictly increasing (index {})", i));
      }
    }
  }
  std::vector<double> init_d2(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d2 = squared_distance(grid[i], grid[j]);
      if (d2 == 0.0) throw GridError(fmt::format("grid points {} and {} coincide", i, j));
      init_d2[i * n + j] = init_d2[j * n + i] = d2;
    }
  }
  if (field.support_radius && max_norm > *field.support_radius + 1.0) {
    throw GridError(fmt::format("grid point of norm {} lies outside B(R + 1)", max_norm));
  }

  HomeomorphismCheck out;
  out.delta = delta.value_or(default_delta_floor(field, max_norm));
  if (!(out.delta > 0.0)) throw ParameterError("delta must be positive");
  out.eta_limit = 1.0 / out.delta;

  std::vector<std::pair<std::size_t, std::size_t>> pairs, edges;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (init_d2[i * n + j] >= out.delta * out.delta) pairs.emplace_back(i, j);
    }
  }
  if (pairs.empty()) throw GridError("no grid pair is delta-separated");
  if (one_d) {
    for (std::size_t i = 0; i + 1 < n; ++i) edges.emplace_back(i, i + 1);
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      double nn = std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < n; ++j) {
        if (j != i) nn = std::min(nn, init_d2[i * n + j]);
      }
      for (std::size_t j = i + 1; j < n; ++j) {
        if (init_d2[i * n + j] <= nn * (1.0 + 1e-9)) edges.emplace_back(i, j);
      }
    }
  }

  const Grid g = time_grid(horizon, dt);
  const FlowEnsemble ens = run_replication(field, grid, seed, g, {});
  CheckReport& rep = out.report;
  out.min_edge_distortion = std::numeric_limits<double>::infinity();
  out.max_edge_distortion = 0.0;
  for (std::size_t k = 0; k < ens.n_records(); ++k) {
    if (one_d && out.order_preserved) {
      for (std::size_t i = 0; i + 1 < n; ++i) {
        if (!(ens.state(k, i)[0] < ens.state(k, i + 1)[0])) {
          out.order_preserved = false;
          out.first_order_violation_step = ens.steps[k];
          break;
        }
      }
    }
    double eta = 0.0;
    for (const auto& [i, j] : pairs) {
      const double d2 = pair_squared_distance(ens, k, i, j);
      eta = std::max(eta, d2 > 0.0 ? 1.0 / std::sqrt(d2) : std::numeric_limits<double>::infinity());
    }
    for (const auto& [i, j] : edges) {
      const double ratio = std::sqrt(pair_squared_distance(ens, k, i, j) / init_d2[i * n + j]);
      out.min_edge_distortion = std::min(out.min_edge_distortion, ratio);
      out.max_edge_distortion = std::max(out.max_edge_distortion, ratio);
    }
    out.eta_max = std::max(out.eta_max, eta);
    out.eta_final = eta;
    rep.rows.push_back({ens.time(k), out.delta, eta, 0.0, 1});
  }

  rep.check = "homeomorphism";
  rep.field = field.name;
  json gj = json::array();
  for (const auto& p : grid) gj.push_back(point_json(p));
  rep.params = json{{"field_params", field_json(field)},
                    {"grid", gj},
                    {"horizon", horizon},
                    {"dt", g.dt},
                    {"seed", seed},
                    {"delta", out.delta}};
  rep.statistics = json{
      {"dimension", field.dim_state},
      {"order_preserved", one_d ? json(out.order_preserved) : json(nullptr)},
      {"first_order_violation_step",
       out.first_order_violation_step ? json(*out.first_order_violation_step) : json(nullptr)},
      {"delta_separated_pairs", pairs.size()},
      {"eta_max", out.eta_max},
      {"eta_final", out.eta_final},
      {"eta_limit", out.eta_limit},
      {"min_edge_distortion", out.min_edge_distortion},
      {"max_edge_distortion", out.max_edge_distortion}};
  const bool ok =
      out.order_preserved && std::isfinite(out.eta_max) && out.eta_max <= out.eta_limit;
  rep.verdict = ok ? Verdict::Pass : Verdict::Fail;
  return out;
}

}  // namespace nlflow
