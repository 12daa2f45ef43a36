#include "nlflow/flow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "nlflow/errors.hpp"

namespace nlflow {

std::string_view to_string(Scheme scheme) {
  switch (scheme) {
    case Scheme::EulerMaruyama: return "EulerMaruyama";
  }
  return "?";
}

std::string_view to_string(HittingKind kind) {
  switch (kind) {
    case HittingKind::PairContact: return "PairContact";
    case HittingKind::BallExit: return "BallExit";
    case HittingKind::BallEntry: return "BallEntry";
  }
  return "?";
}

namespace {

std::vector<std::size_t> record_plan(std::size_t n_steps, const SimulationOptions& options) {
  std::vector<std::size_t> steps;
  if (!options.record_steps.empty()) {
    steps = options.record_steps;
    steps.push_back(0);
    std::sort(steps.begin(), steps.end());
    steps.erase(std::unique(steps.begin(), steps.end()), steps.end());
    if (steps.back() > n_steps) {
      throw ParameterError(fmt::format("record step {} beyond the path length {}", steps.back(),
                                       n_steps));
    }
    return steps;
  }
  const std::size_t stride = std::max<std::size_t>(options.record_stride, 1);
  for (std::size_t k = 0; k <= n_steps; k += stride) steps.push_back(k);
  if (steps.back() != n_steps) steps.push_back(n_steps);
  return steps;
}

}  // namespace

FlowEnsemble simulate_ensemble(const CoefficientField& field, std::vector<Point> initial_points,
                               const BrownianPath& path, Scheme scheme,
                               const SimulationOptions& options) {
  const std::size_t d = field.dim_state;
  const std::size_t m = field.dim_noise;
  if (path.dim() != m) {
    throw ParameterError(fmt::format("path has {} noise components, field needs {}", path.dim(), m));
  }
  for (const auto& p : initial_points) {
    if (p.size() != d) {
      throw ParameterError(fmt::format("initial point of dimension {} for a {}-dimensional field",
                                       p.size(), d));
    }
    for (double v : p) {
      if (!std::isfinite(v)) throw ParameterError("initial points must be finite");
    }
  }

  FlowEnsemble ens{.field = field,
                   .initial_points = std::move(initial_points),
                   .path = path,
                   .scheme = scheme,
                   .steps = record_plan(path.n_steps(), options),
                   .trajectories = {}};
  const std::size_t n = ens.n_points();
  ens.trajectories.reserve(ens.steps.size() * n * d);

  std::vector<double> state(n * d);
  for (std::size_t i = 0; i < n; ++i) {
    std::copy(ens.initial_points[i].begin(), ens.initial_points[i].end(), state.begin() + i * d);
  }
  std::vector<double> sigma(d * m), drift(d), dw(m);
  const double dt = path.dt();
  std::size_t next_record = 0;

  auto record = [&](std::size_t k) {
    if (next_record < ens.steps.size() && ens.steps[next_record] == k) {
      ens.trajectories.insert(ens.trajectories.end(), state.begin(), state.end());
      ++next_record;
    }
  };
  record(0);

  for (std::size_t k = 0; k < path.n_steps(); ++k) {
    for (std::size_t j = 0; j < m; ++j) dw[j] = path.increment(k, j);
    for (std::size_t i = 0; i < n; ++i) {
      std::span<double> x(state.data() + i * d, d);
      field.sigma(x, sigma);
      field.drift(x, drift);
      for (std::size_t r = 0; r < d; ++r) {
        double noise = 0.0;
        for (std::size_t j = 0; j < m; ++j) noise += sigma[r * m + j] * dw[j];
        x[r] = x[r] + noise + drift[r] * dt;
      }
      for (double v : x) {
        if (!(std::abs(v) <= kOverflowLimit)) {
          throw OverflowError(
              fmt::format("coordinate {} of point {} left the finite range at step {}", v, i, k + 1),
              k + 1);
        }
      }
    }
    record(k + 1);
  }
  return ens;
}

RefinementResult refine_until_converged(const CoefficientField& field,
                                        const std::vector<Point>& initial_points,
                                        std::uint64_t seed, double horizon, double dt0,
                                        double target, int max_refinements,
                                        const SimulationOptions& options) {
  if (!(dt0 > 0.0)) throw ParameterError(fmt::format("dt0 must be positive, got {}", dt0));
  if (!(horizon > 0.0)) throw ParameterError(fmt::format("horizon must be positive, got {}", horizon));
  if (!(target > 0.0)) throw ParameterError(fmt::format("target must be positive, got {}", target));
  const auto n0 = static_cast<std::size_t>(std::max(1.0, std::round(horizon / dt0)));
  BrownianPath path = generate_path(seed, horizon / static_cast<double>(n0), n0, field.dim_noise);

  SimulationOptions endpoint_only;
  endpoint_only.record_stride = path.n_steps();
  FlowEnsemble coarse = simulate_ensemble(field, initial_points, path, Scheme::EulerMaruyama,
                                          endpoint_only);
  RefinementResult result{.ensemble = coarse, .dt = path.dt()};
  for (int r = 1; r <= max_refinements; ++r) {
    path = path.refined();
    endpoint_only.record_stride = path.n_steps();
    FlowEnsemble fine = simulate_ensemble(field, initial_points, path, Scheme::EulerMaruyama,
                                          endpoint_only);
    double worst = 0.0;
    bool ok = true;
    for (std::size_t i = 0; i < fine.n_points(); ++i) {
      const auto a = fine.final_state(i);
      const auto b = coarse.final_state(i);
      double diff2 = 0.0;
      for (std::size_t c = 0; c < a.size(); ++c) diff2 += (a[c] - b[c]) * (a[c] - b[c]);
      const double diff = std::sqrt(diff2);
      const double norm = euclidean_norm(a);
      if (diff == 0.0) continue;
      const double rel = norm > 0.0 ? diff / norm : std::numeric_limits<double>::infinity();
      worst = std::max(worst, rel);
      if (!(rel < target)) ok = false;
    }
    result.refinements = r;
    result.last_change = worst;
    result.dt = path.dt();
    coarse = std::move(fine);
    if (ok) {
      result.converged = true;
      break;
    }
  }
  if (options.record_stride == path.n_steps() && options.record_steps.empty()) {
    result.ensemble = std::move(coarse);
  } else {
    result.ensemble = simulate_ensemble(field, initial_points, path, Scheme::EulerMaruyama, options);
  }
  return result;
}

double pair_squared_distance(const FlowEnsemble& ens, std::size_t record, std::size_t i,
                             std::size_t j) noexcept {
  const auto a = ens.state(record, i);
  const auto b = ens.state(record, j);
  double s = 0.0;
  for (std::size_t c = 0; c < a.size(); ++c) s += (a[c] - b[c]) * (a[c] - b[c]);
  return s;
}

HittingTimeRecord hitting_time(const FlowEnsemble& ens, const HittingQuery& q) {
  if (q.point >= ens.n_points()) throw ParameterError("hitting query point index out of range");
  HittingTimeRecord rec{q.kind, q.threshold, std::nullopt};
  switch (q.kind) {
    case HittingKind::PairContact: {
      if (q.other >= ens.n_points() || q.other == q.point) {
        throw ParameterError("pair contact needs two distinct point indices");
      }
      if (!(q.threshold > 0.0)) throw ParameterError("contact threshold eps must be positive");
      const double xi0 = pair_squared_distance(ens, 0, q.point, q.other);
      if (!(q.threshold < xi0)) {
        throw OrderingError(fmt::format(
            "contact threshold {} must lie below the initial squared distance {}", q.threshold, xi0));
      }
      for (std::size_t r = 0; r < ens.n_records(); ++r) {
        if (pair_squared_distance(ens, r, q.point, q.other) <= q.threshold) {
          rec.time = ens.time(r);
          break;
        }
      }
      break;
    }
    case HittingKind::BallExit:
    case HittingKind::BallEntry: {
      if (q.kind == HittingKind::BallExit && !(q.threshold > 0.0)) {
        throw ParameterError("ball exit radius K must be positive");
      }
      if (q.kind == HittingKind::BallEntry && !(q.threshold >= 0.0)) {
        throw ParameterError("ball entry radius R must be nonnegative");
      }
      for (std::size_t r = 0; r < ens.n_records(); ++r) {
        const double n = euclidean_norm(ens.state(r, q.point));
        const bool hit = q.kind == HittingKind::BallExit ? n >= q.threshold : n <= q.threshold;
        if (hit) {
          rec.time = ens.time(r);
          break;
        }
      }
      break;
    }
  }
  return rec;
}

void write_trajectory_csv(const FlowEnsemble& ens, std::ostream& out) {
  out << "t,point_id";
  for (std::size_t c = 0; c < ens.dim(); ++c) out << ",x_" << (c + 1);
  out << '\n';
  for (std::size_t r = 0; r < ens.n_records(); ++r) {
    const double t = ens.time(r);
    for (std::size_t i = 0; i < ens.n_points(); ++i) {
      fmt::print(out, "{},{}", t, i);
      for (double v : ens.state(r, i)) fmt::print(out, ",{}", v);
      out << '\n';
    }
  }
}

}  // namespace nlflow
