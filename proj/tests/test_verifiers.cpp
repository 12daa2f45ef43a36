#include <doctest.h>

#include <cmath>
#include <sstream>
#include <vector>

#include "nlflow/corpus.hpp"
#include "nlflow/errors.hpp"
#include "nlflow/verifiers.hpp"
#include "oracles.hpp"

using namespace nlflow;

namespace {
McSettings mc(std::size_t n, double dt, std::uint64_t seed = 0) { return {n, dt, seed}; }
}  // namespace

TEST_CASE("pair moment on ZeroField is exactly 1") {
  const auto f = make_example_field("ZeroField");
  for (double p : {2.0, -2.0, 4.0}) {
    const auto m = estimate_pair_moment(f, {0.0}, {1.0}, p, 0.7, mc(10, 0.1));
    CHECK(m.estimate == 1.0);
    CHECK(m.ci_halfwidth == 0.0);
    CHECK(m.degenerate);
  }
}

TEST_CASE("pair moments of the exact log flow") {
  const auto f = make_example_field("LogDriftDeterministic");
  const auto m2 = estimate_pair_moment(f, {0.1}, {0.0}, 2.0, 1.0, mc(4, 1e-4));
  CHECK(m2.functional == "power");
  CHECK(m2.estimate == doctest::Approx(oracle::kFlow01T1Squared).epsilon(1e-3));
  CHECK(m2.degenerate);
  const auto mneg = estimate_pair_moment(f, {0.1}, {0.0}, -2.0, 1.0, mc(4, 1e-4));
  CHECK(mneg.functional == "negative-power");
  CHECK(mneg.estimate == doctest::Approx(oracle::kFlow01T1InvSquared).epsilon(1e-3));
  CHECK(mneg.ci_halfwidth == 0.0);
  const auto at0 = estimate_pair_moment(f, {0.1}, {0.0}, 2.0, 0.0, mc(4, 1e-4));
  CHECK(at0.estimate == doctest::Approx(0.01).epsilon(1e-12));
}

TEST_CASE("pair moment argument errors") {
  const auto f = make_example_field("LogDiffusion");
  CHECK_THROWS_AS(estimate_pair_moment(f, {0.1}, {0.1}, 2.0, 1.0, mc(10, 1e-2)), ParameterError);
  CHECK_THROWS_AS(estimate_pair_moment(f, {0.1}, {0.2}, 2.0, 1.0, mc(1, 1e-2)), ParameterError);
  CHECK_THROWS_AS(estimate_pair_moment(f, {0.1}, {0.2}, 0.0, 1.0, mc(10, 1e-2)), ParameterError);
  CHECK_THROWS_AS(estimate_pair_moment(f, {0.1}, {0.1001}, -2.0, 1.0, mc(10, 1e-2)),
                  ParameterError);
}

TEST_CASE("pair moment CI shrinks by sqrt 2 when replications double") {
  const auto f = make_example_field("LogDiffusion");
  const auto a = estimate_pair_moment(f, {0.1}, {0.3}, 2.0, 0.5, mc(400, 1e-2));
  const auto b = estimate_pair_moment(f, {0.1}, {0.3}, 2.0, 0.5, mc(800, 1e-2));
  CHECK(a.ci_halfwidth / b.ci_halfwidth == doctest::Approx(std::sqrt(2.0)).epsilon(0.2));
}

TEST_CASE("Hoelder exponent of the contracting linear flow is flat") {
  const auto f = make_example_field("LipschitzBaseline", {{"drift", -1.0}});
  const auto fits = fit_holder_exponent(f, {0.0}, {1e-4, 1e-3, 1e-2, 1e-1}, 2.0,
                                        {0.0, 0.5, 1.0, 2.0}, mc(2, 1e-3));
  for (const auto& fit : fits) CHECK(fit.slope == doctest::Approx(2.0).epsilon(1e-6));
  const auto chk = check_holder(f, {0.0}, {1e-4, 1e-3, 1e-2, 1e-1}, 2.0, {0.0, 1.0}, mc(2, 1e-3));
  CHECK(chk.report.verdict == Verdict::Pass);
  CHECK(chk.report.statistics["mode"] == "flat");
}

TEST_CASE("Hoelder exponent of the exact log flow decays like e^-t") {
  const auto f = make_example_field("LogDriftDeterministic");
  const std::vector<double> seps{1e-8, 1e-6, 1e-4, 1e-2, 0.3};
  const auto fits = fit_holder_exponent(f, {0.0}, seps, 2.0, {0.0, 0.5, 1.0, 2.0}, mc(2, 1e-4));
  REQUIRE(fits.size() == 4);
  CHECK(fits[0].slope == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(fits[1].slope == doctest::Approx(oracle::kTwoExpMinusHalf).epsilon(0.02));
  CHECK(fits[2].slope == doctest::Approx(oracle::kTwoExpMinusOne).epsilon(0.02));
  CHECK(fits[2].r_squared == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(fits[3].slope == doctest::Approx(oracle::kTwoExpMinusTwo).epsilon(0.02));
  const auto chk = check_holder(f, {0.0}, seps, 2.0, {0.0, 0.5, 1.0, 2.0}, mc(2, 1e-4));
  CHECK(chk.report.verdict == Verdict::Pass);
  CHECK(chk.fitted_c_p == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("Hoelder grid errors") {
  const auto f = make_example_field("LogDriftDeterministic");
  CHECK_THROWS_AS(fit_holder_exponent(f, {0.0}, {1e-4, 1e-3, 1e-2}, 2.0, {1.0}, mc(2, 1e-2)),
                  GridError);
  CHECK_THROWS_AS(fit_holder_exponent(f, {0.0}, {1e-3, 2e-3, 5e-3, 1e-2}, 2.0, {1.0}, mc(2, 1e-2)),
                  GridError);
  CHECK_THROWS_AS(fit_holder_exponent(f, {0.0}, {1e-4, 1e-3, 1e-2, 0.9}, 2.0, {1.0}, mc(2, 1e-2)),
                  GridError);
  CHECK_THROWS_AS(check_holder(f, {0.0}, {1e-4, 1e-3, 1e-2, 1e-1}, 2.0, {1.0, 1.0}, mc(2, 1e-2)),
                  GridError);
}

TEST_CASE("time regularity") {
  const std::vector<std::pair<double, double>> lags{{0.0, 0.01}, {0.0, 0.02}, {0.0, 0.05}, {0.0, 0.1}};
  const auto zero = check_time_regularity(make_example_field("ZeroField"), {0.3}, 2.0, lags, mc(10, 1e-3));
  CHECK(zero.degenerate);
  CHECK(zero.report.verdict == Verdict::ReportOnly);

  const auto diff = check_time_regularity(make_example_field("ConstantDiffusion", {{"c", 0.5}}),
                                          {0.0}, 2.0, lags, mc(4000, 1e-3, 3));
  REQUIRE(diff.slope.has_value());
  CHECK(*diff.slope == doctest::Approx(1.0).epsilon(0.1));
  CHECK(diff.moments.back() == doctest::Approx(0.25 * 0.1).epsilon(0.1));
  CHECK(diff.report.verdict == Verdict::Pass);

  const auto drift = check_time_regularity(make_example_field("LogDriftDeterministic"), {0.5}, 2.0,
                                           lags, mc(2, 1e-4));
  REQUIRE(drift.slope.has_value());
  CHECK(*drift.slope == doctest::Approx(2.0).epsilon(0.02));
  CHECK(drift.report.verdict == Verdict::Pass);

  CHECK_THROWS_AS(check_time_regularity(make_example_field("IdentityDrift"), {0.5}, 2.0, lags,
                                        mc(2, 1e-3)),
                  ParameterError);
}

TEST_CASE("non-confluence examples") {
  const std::vector<double> eps{1e-4, 1e-6, 1e-8, 1e-10, 1e-12};
  const auto zero = check_nonconfluence(make_example_field("ZeroField"), {{{0.0}, {1.0}}}, 1.0,
                                        eps, mc(5, 1e-2));
  for (double fr : zero.frequencies[0]) CHECK(fr == 0.0);
  CHECK(zero.report.verdict == Verdict::Pass);

  const auto lin = check_nonconfluence(make_example_field("LipschitzBaseline", {{"drift", -1.0}}),
                                       {{{0.0}, {1.0}}}, 1.0, {std::exp(-4.0)}, mc(3, 1e-3));
  CHECK(lin.frequencies[0][0] == 0.0);
  const auto lin2 = check_nonconfluence(make_example_field("LipschitzBaseline", {{"drift", -1.0}}),
                                        {{{0.0}, {1.0}}}, 2.1, {std::exp(-4.0)}, mc(3, 1e-3));
  CHECK(lin2.frequencies[0][0] == 1.0);

  const auto logd = check_nonconfluence(make_example_field("LogDiffusion"), {{{0.0}, {0.1}}, {{0.2}, {0.25}}},
                                        1.0, eps, mc(200, 1e-3, 1));
  CHECK(logd.monotone);
  CHECK(logd.exact_contacts == 0);
  CHECK(logd.pair_steps == 2 * 200 * 1001);  // records include t = 0
  CHECK(logd.eps_grid.front() == 1e-4);
  for (const auto& row : logd.frequencies) {
    for (std::size_t k = 1; k < row.size(); ++k) CHECK(row[k] <= row[k - 1]);
  }
  CHECK(logd.report.verdict == Verdict::Pass);

  CHECK_THROWS_AS(check_nonconfluence(make_example_field("ZeroField"), {{{0.0}, {0.01}}}, 1.0,
                                      {1e-3}, mc(2, 1e-2)),
                  OrderingError);
}

TEST_CASE("escape examples") {
  const auto zero = check_escape(make_example_field("ZeroField"), {3.0, 4.0}, 2.0, 1.0, mc(5, 1e-2));
  for (double p : zero.probabilities) CHECK(p == 0.0);
  const auto out = check_escape(make_example_field("IdentityDrift"), {4.0}, 2.0, 1.0, mc(5, 1e-2));
  CHECK(out.probabilities[0] == 0.0);
  const auto in = check_escape(make_example_field("LipschitzBaseline", {{"drift", -1.0}}),
                               {5.0, 8.0, 12.0, 16.0}, 2.0, 5.0, mc(5, 1e-3));
  for (double p : in.probabilities) CHECK(p == 1.0);
  CHECK_THROWS_AS(check_escape(make_example_field("ZeroField"), {1.0}, 2.0, 1.0, mc(5, 1e-2)),
                  OrderingError);
}

TEST_CASE("homeomorphism examples") {
  std::vector<Point> grid;
  for (int k = -5; k <= 5; ++k) grid.push_back({0.1 * k});
  const auto zero = check_homeomorphism_grid(make_example_field("ZeroField"), grid, 1.0, 1e-2, 0);
  CHECK(zero.order_preserved);
  CHECK(zero.eta_max == doctest::Approx(10.0));
  CHECK(zero.eta_final == zero.eta_max);

  const auto lin = check_homeomorphism_grid(
      make_example_field("LipschitzBaseline", {{"drift", -1.0}}), grid, 1.0, 1e-4, 0);
  CHECK(lin.order_preserved);
  CHECK(lin.max_edge_distortion == doctest::Approx(1.0));
  CHECK(lin.min_edge_distortion == doctest::Approx(oracle::kInvE).epsilon(1e-3));

  const std::vector<Point> small{{0.02}, {0.04}, {0.06}, {0.08}, {0.1}};
  const auto logd = check_homeomorphism_grid(make_example_field("LogDriftDeterministic"), small,
                                             1.0, 1e-4, 0);
  CHECK(logd.order_preserved);
  const double gap = std::pow(0.1, oracle::kInvE) - std::pow(0.08, oracle::kInvE);
  CHECK(logd.eta_final == doctest::Approx(1.0 / gap).epsilon(1e-3));
  CHECK(logd.report.verdict == Verdict::Pass);

  CHECK_THROWS_AS(check_homeomorphism_grid(make_example_field("ZeroField"), {{0.2}, {0.1}}, 1.0,
                                           1e-2, 0),
                  GridError);
  CHECK_THROWS_AS(check_homeomorphism_grid(make_example_field("LogDiffusion"), {{0.0}, {3.5}}, 1.0,
                                           1e-2, 0),
                  GridError);
}

TEST_CASE("estimate CSV and JSON record layout") {
  CheckReport rep;
  rep.check = "holder";
  rep.field = "ZeroField";
  rep.verdict = Verdict::Pass;
  rep.rows.push_back({0.5, 0.1, 2.0, 0.0, 10});
  const auto j = rep.to_json();
  CHECK(j["verdict"] == "pass");
  CHECK(j.contains("statistics"));
  CHECK(j.contains("params"));
  std::ostringstream out;
  write_estimates_csv(rep.rows, out);
  CHECK(out.str() == "t,separation_or_x0,estimate,ci_halfwidth,n\n0.5,0.1,2,0,10\n");
  CHECK(to_string(Verdict::ReportOnly) == "report-only");
}

TEST_CASE("Hoelder signature across the corpus") {
  const std::vector<double> seps{1e-4, 1e-3, 1e-2, 1e-1};
  const std::vector<double> t_grid{0.0, 0.5, 1.0, 2.0};
  const auto logd = check_holder(make_example_field("LogDiffusion"), {0.0}, seps, 2.0, t_grid,
                                 mc(2000, 1e-3));
  CHECK(logd.report.statistics["mode"] == "decaying");
  CHECK(logd.report.verdict == Verdict::Pass);
  for (const char* name : {"ConstantDiffusion", "EscapeGrowthField"}) {
    CAPTURE(name);
    const auto flat =
        check_holder(make_example_field(name), {0.5}, seps, 2.0, t_grid, mc(200, 1e-3));
    CHECK(flat.report.statistics["mode"] == "flat");
    CHECK(flat.report.verdict == Verdict::Pass);
  }
}
