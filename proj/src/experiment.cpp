#include "nlflow/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "nlflow/corpus.hpp"
#include "nlflow/errors.hpp"
#include "nlflow/flow.hpp"
#include "nlflow/lyapunov.hpp"

namespace nlflow {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

std::string_view tool_version() { return "nlflow 0.1.0"; }

const std::vector<std::string>& check_names() {
  static const std::vector<std::string> names{
      "nonconfluence", "escape", "holder", "time-regularity", "negative-moment",
      "homeomorphism", "h1",     "modulus-conditions"};
  return names;
}

CoefficientField resolve_field(const ExperimentConfig& config) {
  try {
    return make_example_field(config.field, config.field_params);
  } catch (const UnknownNameError& e) {
    throw ConfigError("experiment.field", e.what());
  } catch (const ParameterError& e) {
    throw ConfigError("field", e.what());
  }
}

namespace {

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(fmt::format("cannot write '{}'", path.string()));
  return out;
}

void write_json(const fs::path& path, const json& doc) {
  auto out = open_output(path);
  out << doc.dump(2) << '\n';
}

void write_provenance(const ExperimentConfig& config, const fs::path& dir) {
  fs::create_directories(dir);
  {
    auto out = open_output(dir / "config.ini");
    write_config(config, out);
  }
  auto out = open_output(dir / "VERSION");
  out << tool_version() << "\nschema_version " << kSchemaVersion << '\n';
}

json header(std::string_view command) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["tool_version"] = std::string(tool_version());
  j["command"] = std::string(command);
  return j;
}

void require_dim(const CoefficientField& field, const Point& p, std::string_view key) {
  if (p.size() != field.dim_state) {
    throw ConfigError(std::string(key), fmt::format("point of dimension {} for a {}-dimensional field",
                                                    p.size(), field.dim_state));
  }
}

McSettings mc_of(const ExperimentConfig& c) {
  return McSettings{.n_replications = c.replications, .dt = c.dt, .seed0 = c.seed};
}

/// Runs a check once per power and merges the outcomes into one record.
template <typename F>
CheckReport merge_by_power(std::string_view name, const CoefficientField& field,
                           const std::vector<double>& powers, F&& run) {
  CheckReport merged;
  merged.check = std::string(name);
  merged.field = field.name;
  merged.verdict = Verdict::Pass;
  json by_power = json::array();
  bool any_decided = false;
  for (double p : powers) {
    CheckReport r = run(p);
    merged.params = r.params;
    merged.params.erase("power");
    json entry = r.statistics;
    entry["power"] = p;
    entry["verdict"] = std::string(to_string(r.verdict));
    by_power.push_back(std::move(entry));
    merged.rows.insert(merged.rows.end(), r.rows.begin(), r.rows.end());
    if (r.verdict == Verdict::Fail) merged.verdict = Verdict::Fail;
    if (r.verdict != Verdict::ReportOnly) any_decided = true;
  }
  merged.params["powers"] = powers;
  merged.statistics["by_power"] = std::move(by_power);
  if (!any_decided) merged.verdict = Verdict::ReportOnly;
  return merged;
}

std::vector<double> select_powers(const std::vector<double>& powers, bool positive) {
  std::vector<double> out;
  for (double p : powers) {
    if ((p > 0.0) == positive) out.push_back(p);
  }
  return out;
}

CheckReport run_check(const ExperimentConfig& c, const CoefficientField& field,
                      std::string_view check) {
  const McSettings mc = mc_of(c);
  if (check == "nonconfluence") {
    for (const auto& [x, y] : c.pairs) {
      require_dim(field, x, "verify.pairs");
      require_dim(field, y, "verify.pairs");
    }
    return check_nonconfluence(field, c.pairs, c.horizon, c.eps, mc).report;
  }
  if (check == "escape") {
    return check_escape(field, c.x0_norms, c.radius, c.horizon, mc).report;
  }
  if (check == "holder") {
    require_dim(field, c.base, "verify.base");
    auto powers = select_powers(c.powers, true);
    if (powers.empty()) throw ConfigError("verify.powers", "holder needs a positive power");
    return merge_by_power("holder", field, powers, [&](double p) {
      return check_holder(field, c.base, c.separations, p, c.t_grid, mc).report;
    });
  }
  if (check == "time-regularity") {
    require_dim(field, c.x0, "verify.x0");
    auto powers = select_powers(c.powers, true);
    if (powers.empty()) throw ConfigError("verify.powers", "time-regularity needs a positive power");
    return merge_by_power("time-regularity", field, powers, [&](double p) {
      return check_time_regularity(field, c.x0, p, c.time_pairs, mc).report;
    });
  }
  if (check == "negative-moment") {
    auto powers = select_powers(c.powers, false);
    if (powers.empty()) powers = {-2.0};
    CheckReport rep;
    rep.check = "negative-moment";
    rep.field = field.name;
    json pairs = json::array();
    for (const auto& [x, y] : c.pairs) pairs.push_back(json::array({x, y}));
    rep.params = json{{"pairs", pairs},
                      {"powers", powers},
                      {"t", c.moment_t},
                      {"delta", c.delta ? json(*c.delta) : json(nullptr)},
                      {"mc", json{{"n_replications", mc.n_replications},
                                  {"dt", mc.dt},
                                  {"seed0", mc.seed0}}}};
    json estimates = json::array();
    bool finite = true;
    for (double p : powers) {
      for (std::size_t i = 0; i < c.pairs.size(); ++i) {
        const auto& [x, y] = c.pairs[i];
        require_dim(field, x, "verify.pairs");
        require_dim(field, y, "verify.pairs");
        const MomentReport m = estimate_pair_moment(field, x, y, p, c.moment_t, mc, c.delta);
        finite = finite && std::isfinite(m.estimate);
        double sep = 0.0;
        for (std::size_t k = 0; k < x.size(); ++k) sep += (x[k] - y[k]) * (x[k] - y[k]);
        sep = std::sqrt(sep);
        estimates.push_back(json{{"pair", i},
                                 {"power", p},
                                 {"functional", m.functional},
                                 {"estimate", std::isfinite(m.estimate) ? json(m.estimate) : json(nullptr)},
                                 {"ci_halfwidth", m.ci_halfwidth},
                                 {"degenerate", m.degenerate},
                                 {"contacts", m.contacts}});
        rep.rows.push_back({m.t, sep, m.estimate, m.ci_halfwidth, m.n_replications});
      }
    }
    rep.statistics = json{{"estimates", estimates}, {"all_finite", finite}};
    rep.verdict = finite ? Verdict::Pass : Verdict::Fail;
    return rep;
  }
  if (check == "homeomorphism") {
    std::vector<Point> grid = c.grid;
    if (grid.empty()) {
      if (field.dim_state != 1) {
        throw ConfigError("verify.grid", "a grid is required for fields of dimension > 1");
      }
      grid = uniform_grid_1d(-1.0, 1.0, 50);
    }
    for (const auto& p : grid) require_dim(field, p, "verify.grid");
    return check_homeomorphism_grid(field, grid, c.horizon, c.dt, c.seed, c.delta).report;
  }
  if (check == "h1") {
    double radius = c.h1_radius;
    if (field.h1_radius) radius = std::min(radius, *field.h1_radius);
    const H1Report h = verify_h1_empirically(field, c.h1_pairs, radius, c.seed);
    CheckReport rep;
    rep.check = "h1";
    rep.field = field.name;
    rep.params = json{{"n_pairs", c.h1_pairs}, {"radius", radius}, {"seed", c.seed}};
    rep.statistics = json{{"modulus", std::string(to_string(field.modulus.family()))},
                          {"declared_c", field.modulus_constant},
                          {"sigma_ratio", h.sigma_ratio},
                          {"drift_ratio", h.drift_ratio},
                          {"valid_pairs", h.valid_pairs},
                          {"smallest_separation", h.smallest_separation}};
    rep.verdict = h.pass ? Verdict::Pass : Verdict::Fail;
    return rep;
  }
  if (check == "modulus-conditions") {
    const double delta = field.modulus.delta_o();
    const auto grid = geometric_grid(delta, delta * 1e-300, 601);
    const auto m = check_modulus_conditions(field.modulus, grid);
    CheckReport rep;
    rep.check = "modulus-conditions";
    rep.field = field.name;
    rep.params = json{{"modulus", std::string(to_string(field.modulus.family()))},
                      {"delta_o", delta},
                      {"grid_points", grid.size()},
                      {"grid_floor", grid.back()}};
    rep.statistics = json{{"unbounded_growth", m.unbounded_growth},
                          {"integral_diverges", m.integral_diverges},
                          {"ratio_vanishes", m.ratio_vanishes},
                          {"divergence_heuristic", m.divergence_heuristic},
                          {"numeric_divergence", m.numeric_divergence},
                          {"partial_integral", m.partial_integral},
                          {"decade_increment_ratio", m.decade_increment_ratio},
                          {"tail_ratio", m.tail_ratio},
                          {"note", m.note}};
    rep.verdict = Verdict::ReportOnly;
    return rep;
  }
  throw UnknownNameError(fmt::format("unknown check '{}'", check));
}

void emit_check(const CheckReport& rep, const fs::path& dir) {
  json doc = header("verify");
  const json body = rep.to_json();
  for (const auto& [k, v] : body.items()) doc[k] = v;
  write_json(dir / (rep.check + ".json"), doc);
  if (!rep.rows.empty()) {
    auto out = open_output(dir / (rep.check + ".csv"));
    write_estimates_csv(rep.rows, out);
  }
}

ModulusSpec bounds_modulus(const BoundsConfig& b) {
  if (b.modulus == "Log") return ModulusSpec::log(b.modulus_scale, b.delta_o.value_or(std::exp(-1.0)));
  if (b.modulus == "LogLog") {
    return b.delta_o ? ModulusSpec(ModulusFamily::LogLog, *b.delta_o, b.modulus_scale)
                     : ModulusSpec::log_log(b.modulus_scale);
  }
  return ModulusSpec::constant(b.modulus_scale, b.delta_o.value_or(1.0));
}

json record(std::string_view op, json inputs, json value, std::string_view method) {
  return json{{"operation", std::string(op)},
              {"inputs", std::move(inputs)},
              {"value", std::move(value)},
              {"method", std::string(method)}};
}

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

void run_simulate(const ExperimentConfig& c, const fs::path& out_dir, std::ostream& log) {
  const CoefficientField field = resolve_field(c);
  for (const auto& p : c.points) require_dim(field, p, "simulate.points");
  write_provenance(c, out_dir);

  SimulationOptions opts;
  opts.record_stride = c.record_stride;
  json summary = header("simulate");
  summary["field"] = field.name;
  summary["field_params"] = field.params;
  summary["seed"] = c.seed;
  summary["horizon"] = c.horizon;
  summary["initial_points"] = c.points;

  std::optional<FlowEnsemble> ens;
  if (c.refine_target) {
    RefinementResult r = refine_until_converged(field, c.points, c.seed, c.horizon, c.dt,
                                                *c.refine_target, 12, opts);
    summary["refinement"] = json{{"target", *c.refine_target},
                                 {"refinements", r.refinements},
                                 {"converged", r.converged},
                                 {"last_change", r.last_change}};
    ens.emplace(std::move(r.ensemble));
  } else {
    const auto n = static_cast<std::size_t>(std::max(1.0, std::round(c.horizon / c.dt)));
    const BrownianPath path =
        generate_path(c.seed, c.horizon / static_cast<double>(n), n, field.dim_noise);
    ens.emplace(simulate_ensemble(field, c.points, path, Scheme::EulerMaruyama, opts));
  }
  summary["dt"] = ens->path.dt();
  summary["n_steps"] = ens->path.n_steps();
  json endpoints = json::array();
  for (std::size_t i = 0; i < ens->n_points(); ++i) {
    const auto s = ens->final_state(i);
    endpoints.push_back(std::vector<double>(s.begin(), s.end()));
  }
  summary["endpoints"] = endpoints;

  {
    auto out = open_output(out_dir / "trajectory.csv");
    write_trajectory_csv(*ens, out);
  }
  write_json(out_dir / "summary.json", summary);
  fmt::print(log, "simulate: {} points, {} steps of {:.6g}; wrote {}\n", ens->n_points(),
             ens->path.n_steps(), ens->path.dt(), out_dir.string());
}

Verdict run_verify(const ExperimentConfig& c, std::string_view check, const fs::path& out_dir,
                   std::ostream& log) {
  const bool all = check == "all";
  if (!all && std::find(check_names().begin(), check_names().end(), check) == check_names().end()) {
    throw UnknownNameError(fmt::format("unknown check '{}'", check));
  }
  const CoefficientField field = resolve_field(c);
  write_provenance(c, out_dir);

  if (!all) {
    const CheckReport rep = run_check(c, field, check);
    emit_check(rep, out_dir);
    fmt::print(log, "verify {}: {}\n", check, to_string(rep.verdict));
    return rep.verdict;
  }

  Verdict overall = Verdict::Pass;
  json summary = header("verify");
  summary["check"] = "all";
  summary["field"] = field.name;
  json results = json::object();
  for (const auto& name : check_names()) {
    CheckReport rep;
    try {
      rep = run_check(c, field, name);
    } catch (const ConfigError&) {
      throw;
    } catch (const OverflowError&) {
      throw;
    } catch (const Error& e) {
      // Preconditions of a single check (e.g. compact support) do not stop the suite.
      rep.check = name;
      rep.field = field.name;
      rep.statistics = json{{"skipped", e.what()}};
      rep.verdict = Verdict::ReportOnly;
    }
    emit_check(rep, out_dir);
    results[name] = std::string(to_string(rep.verdict));
    if (rep.verdict == Verdict::Fail) overall = Verdict::Fail;
    fmt::print(log, "verify {}: {}\n", name, to_string(rep.verdict));
  }
  summary["results"] = results;
  summary["verdict"] = std::string(to_string(overall));
  write_json(out_dir / "all.json", summary);
  return overall;
}

void run_bounds(const ExperimentConfig& c, const fs::path& out_dir, std::ostream& log) {
  const BoundsConfig& b = c.bounds;
  write_provenance(c, out_dir);
  const ModulusSpec modulus = bounds_modulus(b);
  const ContactTransform contact{modulus};
  const std::string family(to_string(modulus.family()));
  const std::string_view psi_method = to_string(psi_contact_method(modulus));
  json records = json::array();

  for (double xi : b.xi) {
    json in{{"modulus", family}, {"delta_o", modulus.delta_o()}, {"xi", xi}};
    records.push_back(record("psi_contact", in, psi_contact(contact, xi), psi_method));
    records.push_back(record("phi_contact", in, phi_contact(contact, xi), psi_method));
  }
  for (double eps : b.eps) {
    json in{{"modulus", family}, {"xi0", b.xi0}, {"eps", eps}, {"c", b.c}, {"horizon", b.horizon}};
    records.push_back(record("noncontact_probability_bound", in,
                             noncontact_probability_bound(contact, b.xi0, eps, b.c, b.horizon),
                             psi_method));
  }
  if (!b.x0_norms.empty()) {
    const GrowthSpec growth = b.growth == "logarithmic" ? GrowthSpec::logarithmic()
                                                         : GrowthSpec::constant(b.growth_value);
    const EscapeTransform escape{growth};
    const std::string_view method = growth.kind() == GrowthSpec::Kind::Constant ? "ClosedForm"
                                                                                 : "Quadrature";
    for (double x0 : b.x0_norms) {
      json in{{"growth", growth.describe()}, {"x0_norm", x0}, {"radius", b.radius},
              {"c", b.c}, {"horizon", b.horizon}};
      records.push_back(record("escape_probability_bound", in,
                               escape_probability_bound(escape, x0, b.radius, b.c, b.horizon),
                               method));
    }
  }
  if (!b.phi0.empty()) {
    std::optional<EvalMethod> method;
    if (b.ode_method == "closed-form") method = EvalMethod::ClosedForm;
    if (b.ode_method == "numeric") method = EvalMethod::Numeric;
    std::vector<double> times = b.times.empty() ? std::vector<double>{0.0} : b.times;
    for (double phi0 : b.phi0) {
      const ComparisonSolution sol = solve_comparison_ode(b.c_p, modulus, phi0, times, method);
      for (std::size_t i = 0; i < times.size(); ++i) {
        json in{{"modulus", family}, {"c_p", b.c_p}, {"phi0", phi0}, {"t", times[i]}};
        if (i < sol.values().size()) {
          in["exit_time"] = sol.exit_time() ? json(*sol.exit_time()) : json(nullptr);
          records.push_back(record("comparison_ode", in, sol.values()[i], to_string(sol.method())));
        } else {
          in["exit_time"] = *sol.exit_time();
          records.push_back(record("comparison_ode", in, nullptr, to_string(sol.method())));
        }
      }
    }
  }
  if (!b.probe_log_inv_phi0.empty()) {
    const FeasibilityProbe probe =
        kolmogorov_feasibility_probe(b.probe_log_inv_phi0, b.c_p, b.probe_t);
    json ratios = json::array();
    for (double r : probe.loglog_ratio) ratios.push_back(finite_or_null(r));
    json in{{"log_inv_phi0", probe.log_inv_phi0}, {"c_p", b.c_p}, {"t", b.probe_t}};
    records.push_back(record("kolmogorov_feasibility_probe", in,
                             json{{"loglog_ratio", ratios},
                                  {"loglog_ratio_decreasing", probe.loglog_ratio_decreasing},
                                  {"log_exponent", probe.log_exponent}},
                             "ClosedForm"));
  }

  json doc = header("bounds");
  doc["records"] = records;
  write_json(out_dir / "bounds.json", doc);
  fmt::print(log, "bounds: {} records; wrote {}\n", records.size(), out_dir.string());
}

void print_corpus(std::ostream& out) {
  for (const auto& e : corpus_entries()) {
    std::string defaults;
    for (const auto& [k, v] : e.defaults) {
      if (!defaults.empty()) defaults += ", ";
      defaults += fmt::format("{}={}", k, v);
    }
    fmt::print(out, "{:<22} {}  [{}]\n", e.name, e.description, defaults);
  }
}

}  // namespace nlflow
