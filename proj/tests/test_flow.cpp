#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "nlflow/brownian.hpp"
#include "nlflow/corpus.hpp"
#include "nlflow/errors.hpp"
#include "nlflow/flow.hpp"
#include "nlflow/stats.hpp"
#include "oracles.hpp"

using namespace nlflow;

TEST_CASE("ZeroField trajectories are constant") {
  const auto f = make_example_field("ZeroField", {{"dim", 2}});
  const auto path = generate_path(1, 0.1, 10, f.dim_noise);
  const auto e = simulate_ensemble(f, {{0.5, -1.0}, {3.0, 2.0}}, path);
  CHECK(e.n_records() == 11);
  for (std::size_t r = 0; r < e.n_records(); ++r) {
    CHECK(e.state(r, 0)[0] == 0.5);
    CHECK(e.state(r, 1)[1] == 2.0);
  }
}

TEST_CASE("identity drift approaches e within O(dt)") {
  const auto f = make_example_field("IdentityDrift");
  double prev_err = 1.0;
  for (std::size_t n : {100u, 200u, 400u, 800u}) {
    const auto e = simulate_ensemble(f, {{1.0}}, generate_path(0, 1.0 / n, n, 1));
    const double err = std::abs(e.final_state(0)[0] - M_E);
    CHECK(err <= 2.0 / static_cast<double>(n));
    CHECK(err < prev_err);
    prev_err = err;
  }
}

TEST_CASE("LogDrift refinement matches the exact flow") {
  const auto f = make_example_field("LogDriftDeterministic");
  const auto res = refine_until_converged(f, {{0.1}}, 0, 1.0, 1e-2, 1e-4);
  CHECK(res.converged);
  CHECK(std::abs(res.ensemble.final_state(0)[0] - oracle::kFlow01T1) <= 1e-3 * oracle::kFlow01T1);
  CHECK(res.last_change < 1e-4);
}

TEST_CASE("ZeroField converges at the first refinement") {
  const auto res =
      refine_until_converged(make_example_field("ZeroField"), {{0.3}}, 0, 1.0, 0.1, 1e-6);
  CHECK(res.converged);
  CHECK(res.refinements == 1);
}

TEST_CASE("permuting initial points permutes trajectories bit for bit") {
  const auto f = make_example_field("LogDiffusion", {{"dim", 2}});
  const auto path = generate_path(8, 1e-3, 500, f.dim_noise);
  const std::vector<Point> pts{{0.1, 0.2}, {-0.4, 0.05}, {0.7, -0.3}, {0.0, 0.0}};
  const std::vector<Point> perm{pts[2], pts[0], pts[3], pts[1]};
  const auto a = simulate_ensemble(f, pts, path);
  const auto b = simulate_ensemble(f, perm, path);
  const std::size_t map[] = {1, 3, 0, 2};  // pts[i] sits at perm[map[i]]
  for (std::size_t r = 0; r < a.n_records(); ++r) {
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const auto sa = a.state(r, i);
      const auto sb = b.state(r, map[i]);
      CHECK(std::equal(sa.begin(), sa.end(), sb.begin()));
    }
  }
}

TEST_CASE("ensembles are pure functions of their inputs") {
  const auto f = make_example_field("ConstantDiffusion");
  const auto a = simulate_ensemble(f, {{0.1}, {0.2}}, generate_path(3, 1e-3, 1000, 1));
  const auto b = simulate_ensemble(f, {{0.1}, {0.2}}, generate_path(3, 1e-3, 1000, 1));
  CHECK(a.trajectories == b.trajectories);
}

TEST_CASE("truncated fields stay inside the support ball") {
  for (const char* name : {"LogDiffusion", "ConstantDiffusion"}) {
    const auto f = make_example_field(name, {{"c", 3.0}});
    const double ball = *f.support_radius;
    std::vector<Point> pts;
    for (int k = -10; k <= 10; ++k) pts.push_back({ball * k / 10.0});
    const auto e = simulate_ensemble(f, pts, generate_path(4, 1e-3, 2000, 1));
    double max_step = 0.0, max_norm = 0.0;
    for (std::size_t r = 0; r < e.n_records(); ++r) {
      for (std::size_t i = 0; i < pts.size(); ++i) {
        max_norm = std::max(max_norm, std::abs(e.state(r, i)[0]));
        if (r > 0) max_step = std::max(max_step, std::abs(e.state(r, i)[0] - e.state(r - 1, i)[0]));
      }
    }
    CHECK(max_norm <= ball + max_step);
  }
}

TEST_CASE("overflow is reported with the step") {
  const auto f = make_example_field("IdentityDrift");
  try {
    simulate_ensemble(f, {{1e299}}, generate_path(0, 100.0, 10, 1));
    FAIL("expected overflow");
  } catch (const OverflowError& e) {
    CHECK(e.step() == 1);
  }
}

TEST_CASE("record options") {
  const auto f = make_example_field("ZeroField");
  const auto path = generate_path(0, 0.1, 10, 1);
  SimulationOptions stride;
  stride.record_stride = 3;
  CHECK(simulate_ensemble(f, {{0.0}}, path, Scheme::EulerMaruyama, stride).steps ==
        std::vector<std::size_t>{0, 3, 6, 9, 10});
  SimulationOptions explicit_steps;
  explicit_steps.record_steps = {7, 2, 2};
  CHECK(simulate_ensemble(f, {{0.0}}, path, Scheme::EulerMaruyama, explicit_steps).steps ==
        std::vector<std::size_t>{0, 2, 7});
  explicit_steps.record_steps = {11};
  CHECK_THROWS_AS(simulate_ensemble(f, {{0.0}}, path, Scheme::EulerMaruyama, explicit_steps),
                  ParameterError);
  CHECK_THROWS_AS(simulate_ensemble(f, {{0.0, 1.0}}, path), ParameterError);
}

TEST_CASE("hitting times") {
  const auto zero = make_example_field("ZeroField");
  const auto z = simulate_ensemble(zero, {{0.0}, {1.0}}, generate_path(0, 0.01, 100, 1));
  CHECK_FALSE(hitting_time(z, HittingQuery::pair_contact(0, 1, 0.5)).time.has_value());

  const auto lin = make_example_field("LipschitzBaseline", {{"drift", -1.0}});
  const auto l = simulate_ensemble(lin, {{0.0}, {1.0}}, generate_path(0, 1e-4, 20000, 1));
  const auto hit = hitting_time(l, HittingQuery::pair_contact(0, 1, std::exp(-2.0)));
  REQUIRE(hit.time.has_value());
  CHECK(*hit.time == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(hit.kind == HittingKind::PairContact);

  const auto exit = hitting_time(l, HittingQuery::ball_exit(1, 0.5));
  REQUIRE(exit.time.has_value());
  CHECK(*exit.time == 0.0);
  const auto entry = hitting_time(l, HittingQuery::ball_entry(1, 0.5));
  REQUIRE(entry.time.has_value());
  CHECK(*entry.time == doctest::Approx(std::log(2.0)).epsilon(1e-3));

  CHECK_THROWS_AS(hitting_time(l, HittingQuery::pair_contact(0, 1, 2.0)), OrderingError);
  CHECK_THROWS_AS(hitting_time(l, HittingQuery::pair_contact(0, 1, 0.0)), ParameterError);
  CHECK_THROWS_AS(hitting_time(l, HittingQuery::pair_contact(0, 5, 0.1)), ParameterError);
}

TEST_CASE("trajectory CSV layout") {
  const auto f = make_example_field("ZeroField", {{"dim", 2}});
  SimulationOptions opt;
  opt.record_stride = 2;
  const auto e = simulate_ensemble(f, {{0.1, 0.2}, {1.0, 2.0}}, generate_path(0, 0.5, 2, f.dim_noise),
                                   Scheme::EulerMaruyama, opt);
  std::ostringstream out;
  write_trajectory_csv(e, out);
  CHECK(out.str() ==
        "t,point_id,x_1,x_2\n"
        "0,0,0.1,0.2\n0,1,1,2\n"
        "1,0,0.1,0.2\n1,1,1,2\n");
}

namespace {

// Mean absolute endpoint error of Euler-Maruyama for dX = a X dt + s X dW
// against the exact geometric Brownian motion, at dt = 2^-k0 .. 2^-(k0+4).
double strong_slope(double a, double s) {
  const int reps = 200;
  std::vector<double> log_dt, log_err;
  std::vector<double> err(5, 0.0);
  const auto f = make_example_field("LipschitzBaseline", {{"drift", a}, {"noise", s}});
  for (int r = 0; r < reps; ++r) {
    auto path = generate_path(1000 + r, 1.0 / 16, 16, 1);
    const double w = path.position(path.n_steps(), 0);
    const double exact = std::exp((a - 0.5 * s * s) + s * w);
    for (int level = 0; level < 5; ++level) {
      const auto e = simulate_ensemble(f, {{1.0}}, path);
      err[level] += std::abs(e.final_state(0)[0] - exact) / reps;
      path = path.refined();
    }
  }
  for (int level = 0; level < 5; ++level) {
    log_dt.push_back(std::log(1.0 / 16) - level * std::log(2.0));
    log_err.push_back(std::log(err[level]));
  }
  return stats::ordinary_least_squares(log_dt, log_err).slope;
}

}  // namespace

TEST_CASE("strong convergence rates of the linear baseline") {
  CHECK(strong_slope(0.5, 0.8) == doctest::Approx(0.5).epsilon(0.3));  // +-0.15
  CHECK(strong_slope(-1.0, 0.0) == doctest::Approx(1.0).epsilon(0.15));
}
