#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "nlflow/coefficient_field.hpp"

namespace nlflow {

/// Inputs of the `bounds` subcommand.
struct BoundsConfig {
  std::string modulus = "Log";  // Log, LogLog or Constant
  double modulus_scale = 1.0;
  std::optional<double> delta_o;
  std::vector<double> xi;
  double xi0 = 1e-2;
  std::vector<double> eps;
  double c = 1.0;
  double horizon = 1.0;
  std::string growth = "logarithmic";  // logarithmic or constant
  double growth_value = 1.0;
  std::vector<double> x0_norms;
  double radius = 1.0;
  double c_p = 1.0;
  std::vector<double> phi0;
  std::vector<double> times;
  std::string ode_method = "auto";  // auto, closed-form or numeric
  std::vector<double> probe_log_inv_phi0;
  double probe_t = 1.0;

  bool operator==(const BoundsConfig&) const = default;
};

/// One experiment, as read from an INI file with the sections
/// [experiment], [field], [simulate], [verify] and [bounds].
///
/// Lists are comma separated; point lists separate points with ';' and
/// coordinates with ','; pairs join their two members with ':'.
struct ExperimentConfig {
  std::string field = "ZeroField";
  FieldParams field_params;
  std::uint64_t seed = 0;
  double dt = 1e-3;
  double horizon = 1.0;
  std::size_t replications = 100;
  std::string output_dir = "out";

  std::vector<Point> points{{0.1}};
  std::optional<double> refine_target;
  std::size_t record_stride = 1;

  std::vector<std::pair<Point, Point>> pairs{{{0.0}, {0.1}}};
  std::vector<double> eps{1e-4, 1e-6, 1e-8, 1e-10, 1e-12};
  Point base{0.0};
  std::vector<double> separations{1e-4, 1e-3, 1e-2, 1e-1};
  std::vector<double> powers{2.0};
  std::vector<double> t_grid{0.0, 0.5, 1.0, 2.0};
  std::vector<std::pair<double, double>> time_pairs{{0.0, 0.01}, {0.0, 0.02}, {0.0, 0.05},
                                                    {0.0, 0.1}};
  Point x0{0.1};
  std::vector<double> x0_norms{5.0, 8.0, 12.0, 16.0};
  double radius = 2.0;
  std::vector<Point> grid;
  std::optional<double> delta;
  double moment_t = 1.0;
  std::size_t h1_pairs = 10000;
  double h1_radius = 2.0;

  BoundsConfig bounds;

  bool operator==(const ExperimentConfig&) const = default;
};

/// ConfigError (naming the key) for unknown sections or keys, unparsable
/// values and invalid settings.
ExperimentConfig parse_config(std::istream& in);
ExperimentConfig load_config(const std::string& path);
void write_config(const ExperimentConfig& config, std::ostream& out);

/// Range checks that do not need the corpus; ConfigError on failure.
void validate_config(const ExperimentConfig& config);

/// `n` equally spaced 1D points on [lo, hi].
std::vector<Point> uniform_grid_1d(double lo, double hi, std::size_t n);

}  // namespace nlflow
