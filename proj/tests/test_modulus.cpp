#include <doctest.h>

#include <cmath>
#include <vector>

#include "nlflow/errors.hpp"
#include "nlflow/modulus.hpp"
#include "oracles.hpp"

using namespace nlflow;

TEST_CASE("eval_modulus examples") {
  CHECK(eval_modulus(ModulusSpec::log(), std::exp(-2.0)) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(eval_modulus(ModulusSpec::constant(5.0), 0.1) == 5.0);
  const double s = std::exp(-std::exp(2.0));
  CHECK(eval_modulus(ModulusSpec::log_log(), s) ==
        doctest::Approx(oracle::kTwoESquared).epsilon(1e-13));
}

TEST_CASE("eval_modulus domain and family errors") {
  const auto log = ModulusSpec::log();
  CHECK_THROWS_AS(log(0.0), DomainError);
  CHECK_THROWS_AS(log(-1e-3), DomainError);
  CHECK_THROWS_AS(log(0.5), DomainError);
  CHECK_NOTHROW(log(oracle::kInvE));
  CHECK_THROWS_AS(ModulusSpec(ModulusFamily::LogLog, 0.2, 1.0), FamilyError);
  CHECK_NOTHROW(ModulusSpec(ModulusFamily::LogLog, oracle::kInv2E, 1.0));
  CHECK(ModulusSpec::log_log().delta_o() == doctest::Approx(oracle::kInv2E).epsilon(1e-15));
  CHECK_THROWS_AS(ModulusSpec(ModulusFamily::Log, 1.0, 1.0), FamilyError);
  CHECK_THROWS_AS(ModulusSpec::log(0.0), ParameterError);
}

TEST_CASE("family names round trip") {
  for (auto f : {ModulusFamily::Log, ModulusFamily::LogLog, ModulusFamily::Constant,
                 ModulusFamily::Tabulated}) {
    CHECK(modulus_family_from_string(to_string(f)) == f);
  }
}

TEST_CASE("modulus invariants on a geometric grid") {
  for (const auto& spec : {ModulusSpec::log(), ModulusSpec::log(2.5), ModulusSpec::log_log()}) {
    const auto grid = geometric_grid(spec.delta_o(), 1e-250, 400);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      CHECK(spec(grid[i]) > 0.0);
      if (i > 0) CHECK(spec(grid[i]) > spec(grid[i - 1]));  // decreasing in s
    }
    // s r(s) midpoint-concave
    for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
      const double a = grid[i + 1], b = grid[i];
      const double m = 0.5 * (a + b);
      CHECK(m * spec(m) >= 0.5 * (a * spec(a) + b * spec(b)) * (1.0 - 1e-12));
    }
  }
  const auto c = ModulusSpec::constant(3.0);
  for (double s : geometric_grid(1.0, 1e-200, 50)) CHECK(c(s) == 3.0);
}

TEST_CASE("closed-form derivative agrees with a difference quotient") {
  for (const auto& spec : {ModulusSpec::log(), ModulusSpec::log_log(), ModulusSpec::constant(2.0)}) {
    for (double s : {1e-8, 1e-4, 0.05}) {
      const double h = s * 1e-6;
      const double fd = (spec(s + h) - spec(s - h)) / (2 * h);
      CHECK(spec.derivative(s) == doctest::Approx(fd).epsilon(1e-6));
    }
  }
}

TEST_CASE("tabulated modulus interpolates in log-log coordinates") {
  std::vector<double> s, r;
  for (int k = 12; k >= 0; --k) {
    s.push_back(std::pow(10.0, -k));
    r.push_back(std::pow(10.0, 0.5 * k));  // r = s^{-1/2}
  }
  const auto t = ModulusSpec::tabulated(s, r, 1.0);
  CHECK(t(3e-5) == doctest::Approx(std::pow(3e-5, -0.5)).epsilon(1e-12));
  CHECK(t(1e-14) == doctest::Approx(1e7).epsilon(1e-12));  // extrapolated
  CHECK(t.derivative(1e-6) == doctest::Approx(-0.5 * std::pow(1e-6, -1.5)).epsilon(1e-5));
  CHECK_FALSE(t.analytic_divergence().has_value());
  CHECK_THROWS_AS(ModulusSpec(ModulusFamily::Tabulated, 1.0, 1.0), FamilyError);
  CHECK_THROWS_AS(ModulusSpec::tabulated({1.0}, {1.0}, 1.0), ParameterError);
}

TEST_CASE("modulus conditions: Log and LogLog satisfy (i)-(iii)") {
  for (const auto& spec : {ModulusSpec::log(), ModulusSpec::log_log()}) {
    const auto grid = geometric_grid(spec.delta_o(), 1e-300, 301);
    const auto rep = check_modulus_conditions(spec, grid);
    CHECK(rep.unbounded_growth);
    CHECK(rep.integral_diverges);
    CHECK(rep.ratio_vanishes);
    CHECK_FALSE(rep.divergence_heuristic);
    CHECK(rep.numeric_divergence);
  }
}

TEST_CASE("modulus conditions: Constant is bounded, integral diverges like log") {
  const auto spec = ModulusSpec::constant(1.0);
  const auto rep = check_modulus_conditions(spec, geometric_grid(1.0, 1e-12, 61));
  CHECK_FALSE(rep.unbounded_growth);
  CHECK(rep.integral_diverges);
  CHECK(rep.ratio_vanishes);
  CHECK_FALSE(rep.note.empty());
  // log(1/1e-12) is the partial integral of ds/s
  CHECK(rep.partial_integral == doctest::Approx(12 * std::log(10.0)).epsilon(1e-8));
}

TEST_CASE("modulus conditions: tabulated s^{-1/2} has a convergent integral") {
  std::vector<double> s, r;
  for (int k = 16; k >= 0; --k) {
    s.push_back(std::pow(10.0, -k));
    r.push_back(std::pow(10.0, 0.5 * k));
  }
  const auto t = ModulusSpec::tabulated(s, r, 1.0);
  const auto rep = check_modulus_conditions(t, geometric_grid(1.0, 1e-15, 151));
  CHECK(rep.unbounded_growth);
  CHECK_FALSE(rep.integral_diverges);
  CHECK(rep.divergence_heuristic);
  CHECK_FALSE(rep.ratio_vanishes);
  CHECK(rep.tail_ratio == doctest::Approx(-0.5).epsilon(1e-4));
  // 2 sqrt(delta) - 2 sqrt(floor)
  CHECK(rep.partial_integral == doctest::Approx(2.0 - 2.0 * std::sqrt(1e-15)).epsilon(1e-8));
}

TEST_CASE("modulus condition grid errors") {
  const auto spec = ModulusSpec::log();
  CHECK_THROWS_AS(check_modulus_conditions(spec, geometric_grid(0.3, 1e-10, 9)), GridError);
  CHECK_THROWS_AS(check_modulus_conditions(spec, geometric_grid(0.3, 1e-4, 20)), GridError);
  CHECK_THROWS_AS(check_modulus_conditions(spec, geometric_grid(0.5, 1e-10, 20)), GridError);
}

TEST_CASE("growth spec invariants") {
  const auto g = GrowthSpec::logarithmic();
  CHECK(check_growth_invariants(g));
  CHECK(g.f(1.0) == 1.0);
  CHECK(g.rho(std::exp(2.0)) == doctest::Approx(3.0));
  CHECK(g.f(0.0) == 0.5);
  CHECK_THROWS_AS(g.rho(0.5), DomainError);
  CHECK_THROWS_AS(g.f(-1.0), DomainError);
  CHECK(check_growth_invariants(GrowthSpec::constant(2.0)));
  CHECK_FALSE(check_growth_invariants(GrowthSpec::constant(0.0)));
  CHECK_THROWS_AS(GrowthSpec::constant(-1.0), ParameterError);
}
