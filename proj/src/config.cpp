#include "nlflow/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

#include "nlflow/errors.hpp"

namespace nlflow {

namespace pt = boost::property_tree;

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string fmt_double(double v) { return fmt::format("{}", v); }

std::string join_doubles(const std::vector<double>& v, std::string_view sep = ", ") {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += sep;
    out += fmt_double(v[i]);
  }
  return out;
}

std::string join_points(const std::vector<Point>& pts) {
  std::string out;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (i) out += "; ";
    out += join_doubles(pts[i], ",");
  }
  return out;
}

/// Typed access to one section, recording which keys were consumed.
class Section {
 public:
  Section(std::string name, const pt::ptree* tree) : name_(std::move(name)), tree_(tree) {}

  std::string key(std::string_view k) const { return fmt::format("{}.{}", name_, k); }

  std::optional<std::string> raw(std::string_view k) {
    used_.insert(std::string(k));
    if (!tree_) return std::nullopt;
    auto it = tree_->find(std::string(k));
    if (it == tree_->not_found()) return std::nullopt;
    return trim(it->second.data());
  }

  double to_double(std::string_view k, const std::string& text) const {
    double v = 0.0;
    const char* first = text.data();
    const char* last = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last || !std::isfinite(v)) {
      throw ConfigError(key(k), fmt::format("'{}' is not a finite number", text));
    }
    return v;
  }

  void get(std::string_view k, double& out) {
    if (auto s = raw(k)) out = to_double(k, *s);
  }
  void get(std::string_view k, std::optional<double>& out) {
    if (auto s = raw(k)) out = to_double(k, *s);
  }
  void get(std::string_view k, std::string& out) {
    if (auto s = raw(k)) {
      if (s->empty()) throw ConfigError(key(k), "value is empty");
      out = *s;
    }
  }
  void get_count(std::string_view k, std::size_t& out) { out = static_cast<std::size_t>(unsigned_value(k, out)); }
  void get(std::string_view k, std::uint64_t& out) { out = unsigned_value(k, out); }

  void get(std::string_view k, std::vector<double>& out) {
    if (auto s = raw(k)) out = doubles(k, *s, ',');
  }
  void get(std::string_view k, std::vector<Point>& out) {
    if (auto s = raw(k)) out = points(k, *s);
  }
  void get(std::string_view k, std::vector<std::pair<Point, Point>>& out) {
    if (auto s = raw(k)) {
      out.clear();
      if (s->empty()) return;
      for (const auto& item : split(*s, ';')) {
        const auto parts = split(item, ':');
        if (parts.size() != 2) {
          throw ConfigError(key(k), fmt::format("pair '{}' must have the form x:y", item));
        }
        out.emplace_back(doubles(k, parts[0], ','), doubles(k, parts[1], ','));
      }
    }
  }
  void get(std::string_view k, std::vector<std::pair<double, double>>& out) {
    if (auto s = raw(k)) {
      out.clear();
      if (s->empty()) return;
      for (const auto& item : split(*s, ';')) {
        const auto parts = split(item, ':');
        if (parts.size() != 2) {
          throw ConfigError(key(k), fmt::format("time pair '{}' must have the form s:t", item));
        }
        out.emplace_back(to_double(k, parts[0]), to_double(k, parts[1]));
      }
    }
  }

  /// Every key present in the file must have been read.
  void reject_unknown() const {
    if (!tree_) return;
    for (const auto& [k, v] : *tree_) {
      if (!used_.count(k)) throw ConfigError(key(k), "unknown key");
    }
  }

 private:
  std::uint64_t unsigned_value(std::string_view k, std::uint64_t fallback) {
    auto s = raw(k);
    if (!s) return fallback;
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(s->data(), s->data() + s->size(), v);
    if (ec != std::errc() || ptr != s->data() + s->size()) {
      throw ConfigError(key(k), fmt::format("'{}' is not a nonnegative integer", *s));
    }
    return v;
  }

  std::vector<double> doubles(std::string_view k, const std::string& text, char sep) const {
    std::vector<double> out;
    if (text.empty()) return out;
    for (const auto& item : split(text, sep)) out.push_back(to_double(k, item));
    return out;
  }

  std::vector<Point> points(std::string_view k, const std::string& text) const {
    // linspace:lo,hi,n expands to n equally spaced 1D points.
    constexpr std::string_view kLinspace = "linspace:";
    if (text.rfind(kLinspace, 0) == 0) {
      const auto v = doubles(k, text.substr(kLinspace.size()), ',');
      if (v.size() != 3 || v[2] < 2 || v[2] != std::floor(v[2]) || !(v[1] > v[0])) {
        throw ConfigError(key(k), "linspace needs lo,hi,n with lo < hi and an integer n >= 2");
      }
      return uniform_grid_1d(v[0], v[1], static_cast<std::size_t>(v[2]));
    }
    std::vector<Point> out;
    if (text.empty()) return out;
    for (const auto& item : split(text, ';')) out.push_back(doubles(k, item, ','));
    return out;
  }

  std::string name_;
  const pt::ptree* tree_;
  std::set<std::string> used_;
};

const pt::ptree* child(const pt::ptree& root, const std::string& name) {
  auto it = root.find(name);
  return it == root.not_found() ? nullptr : &it->second;
}

}  // namespace

std::vector<Point> uniform_grid_1d(double lo, double hi, std::size_t n) {
  if (n < 2 || !(hi > lo)) throw ParameterError("uniform grid needs n >= 2 and hi > lo");
  std::vector<Point> out;
  for (std::size_t i = 0; i < n; ++i) {
    const double u = static_cast<double>(i) / static_cast<double>(n - 1);
    out.push_back({i + 1 == n ? hi : lo + (hi - lo) * u});
  }
  return out;
}

ExperimentConfig parse_config(std::istream& in) {
  pt::ptree root;
  try {
    pt::read_ini(in, root);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(fmt::format("line {}", e.line()), e.message());
  }
  static const std::set<std::string> kSections{"experiment", "field", "simulate", "verify",
                                               "bounds"};
  for (const auto& [name, sub] : root) {
    if (!kSections.count(name)) {
      throw ConfigError(name, sub.empty() ? "key outside of any section" : "unknown section");
    }
  }

  ExperimentConfig c;
  Section ex("experiment", child(root, "experiment"));
  ex.get("field", c.field);
  ex.get("seed", c.seed);
  ex.get("dt", c.dt);
  ex.get("horizon", c.horizon);
  ex.get_count("replications", c.replications);
  ex.get("output", c.output_dir);
  ex.reject_unknown();

  if (const auto* f = child(root, "field")) {
    Section fs("field", f);
    for (const auto& [k, v] : *f) {
      double value = 0.0;
      fs.get(k, value);
      c.field_params[k] = value;
    }
  }

  Section sim("simulate", child(root, "simulate"));
  sim.get("points", c.points);
  sim.get("refine_target", c.refine_target);
  sim.get_count("record_stride", c.record_stride);
  sim.reject_unknown();

  Section ver("verify", child(root, "verify"));
  ver.get("pairs", c.pairs);
  ver.get("eps", c.eps);
  ver.get("base", c.base);
  ver.get("separations", c.separations);
  ver.get("powers", c.powers);
  ver.get("t_grid", c.t_grid);
  ver.get("time_pairs", c.time_pairs);
  ver.get("x0", c.x0);
  ver.get("x0_norms", c.x0_norms);
  ver.get("radius", c.radius);
  ver.get("grid", c.grid);
  ver.get("delta", c.delta);
  ver.get("moment_t", c.moment_t);
  ver.get_count("h1_pairs", c.h1_pairs);
  ver.get("h1_radius", c.h1_radius);
  ver.reject_unknown();

  BoundsConfig& b = c.bounds;
  Section bs("bounds", child(root, "bounds"));
  bs.get("modulus", b.modulus);
  bs.get("modulus_scale", b.modulus_scale);
  bs.get("delta_o", b.delta_o);
  bs.get("xi", b.xi);
  bs.get("xi0", b.xi0);
  bs.get("eps", b.eps);
  bs.get("c", b.c);
  bs.get("horizon", b.horizon);
  bs.get("growth", b.growth);
  bs.get("growth_value", b.growth_value);
  bs.get("x0_norms", b.x0_norms);
  bs.get("radius", b.radius);
  bs.get("c_p", b.c_p);
  bs.get("phi0", b.phi0);
  bs.get("times", b.times);
  bs.get("ode_method", b.ode_method);
  bs.get("probe_log_inv_phi0", b.probe_log_inv_phi0);
  bs.get("probe_t", b.probe_t);
  bs.reject_unknown();

  validate_config(c);
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("--config", fmt::format("cannot open '{}'", path));
  return parse_config(in);
}

void validate_config(const ExperimentConfig& c) {
  auto require = [](bool ok, std::string_view key, std::string_view what) {
    if (!ok) throw ConfigError(std::string(key), std::string(what));
  };
  require(c.dt > 0.0, "experiment.dt", "must be positive");
  require(c.horizon > 0.0, "experiment.horizon", "must be positive");
  require(c.replications >= 2, "experiment.replications", "must be at least 2");
  require(!c.points.empty(), "simulate.points", "at least one point is required");
  require(!c.refine_target || *c.refine_target > 0.0, "simulate.refine_target",
          "must be positive");
  require(c.record_stride >= 1, "simulate.record_stride", "must be at least 1");
  for (double e : c.eps) require(e > 0.0, "verify.eps", "values must be positive");
  for (double s : c.separations) require(s > 0.0, "verify.separations", "values must be positive");
  for (double p : c.powers) require(p != 0.0, "verify.powers", "values must be nonzero");
  for (double t : c.t_grid) require(t >= 0.0, "verify.t_grid", "values must be nonnegative");
  require(c.radius > 0.0, "verify.radius", "must be positive");
  require(!c.delta || *c.delta > 0.0, "verify.delta", "must be positive");
  require(c.moment_t >= 0.0, "verify.moment_t", "must be nonnegative");
  require(c.h1_pairs >= 1, "verify.h1_pairs", "must be at least 1");
  require(c.h1_radius > 0.0, "verify.h1_radius", "must be positive");
  const auto& b = c.bounds;
  require(b.modulus == "Log" || b.modulus == "LogLog" || b.modulus == "Constant",
          "bounds.modulus", "must be Log, LogLog or Constant");
  require(b.growth == "logarithmic" || b.growth == "constant", "bounds.growth",
          "must be logarithmic or constant");
  require(b.ode_method == "auto" || b.ode_method == "closed-form" || b.ode_method == "numeric",
          "bounds.ode_method", "must be auto, closed-form or numeric");
}

void write_config(const ExperimentConfig& c, std::ostream& out) {
  pt::ptree root;
  auto put = [&](const std::string& path, const std::string& value) {
    root.put(pt::ptree::path_type(path, '/'), value);
  };
  put("experiment/field", c.field);
  put("experiment/seed", std::to_string(c.seed));
  put("experiment/dt", fmt_double(c.dt));
  put("experiment/horizon", fmt_double(c.horizon));
  put("experiment/replications", std::to_string(c.replications));
  put("experiment/output", c.output_dir);
  for (const auto& [k, v] : c.field_params) put("field/" + k, fmt_double(v));

  put("simulate/points", join_points(c.points));
  if (c.refine_target) put("simulate/refine_target", fmt_double(*c.refine_target));
  put("simulate/record_stride", std::to_string(c.record_stride));

  std::string pairs;
  for (std::size_t i = 0; i < c.pairs.size(); ++i) {
    if (i) pairs += "; ";
    pairs += join_doubles(c.pairs[i].first, ",") + ":" + join_doubles(c.pairs[i].second, ",");
  }
  put("verify/pairs", pairs);
  put("verify/eps", join_doubles(c.eps));
  put("verify/base", join_doubles(c.base, ","));
  put("verify/separations", join_doubles(c.separations));
  put("verify/powers", join_doubles(c.powers));
  put("verify/t_grid", join_doubles(c.t_grid));
  std::string tp;
  for (std::size_t i = 0; i < c.time_pairs.size(); ++i) {
    if (i) tp += "; ";
    tp += fmt_double(c.time_pairs[i].first) + ":" + fmt_double(c.time_pairs[i].second);
  }
  put("verify/time_pairs", tp);
  put("verify/x0", join_doubles(c.x0, ","));
  put("verify/x0_norms", join_doubles(c.x0_norms));
  put("verify/radius", fmt_double(c.radius));
  put("verify/grid", join_points(c.grid));
  if (c.delta) put("verify/delta", fmt_double(*c.delta));
  put("verify/moment_t", fmt_double(c.moment_t));
  put("verify/h1_pairs", std::to_string(c.h1_pairs));
  put("verify/h1_radius", fmt_double(c.h1_radius));

  const auto& b = c.bounds;
  put("bounds/modulus", b.modulus);
  put("bounds/modulus_scale", fmt_double(b.modulus_scale));
  if (b.delta_o) put("bounds/delta_o", fmt_double(*b.delta_o));
  put("bounds/xi", join_doubles(b.xi));
  put("bounds/xi0", fmt_double(b.xi0));
  put("bounds/eps", join_doubles(b.eps));
  put("bounds/c", fmt_double(b.c));
  put("bounds/horizon", fmt_double(b.horizon));
  put("bounds/growth", b.growth);
  put("bounds/growth_value", fmt_double(b.growth_value));
  put("bounds/x0_norms", join_doubles(b.x0_norms));
  put("bounds/radius", fmt_double(b.radius));
  put("bounds/c_p", fmt_double(b.c_p));
  put("bounds/phi0", join_doubles(b.phi0));
  put("bounds/times", join_doubles(b.times));
  put("bounds/ode_method", b.ode_method);
  put("bounds/probe_log_inv_phi0", join_doubles(b.probe_log_inv_phi0));
  put("bounds/probe_t", fmt_double(b.probe_t));
  pt::write_ini(out, root);
}

}  // namespace nlflow
