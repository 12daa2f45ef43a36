#include <doctest.h>

#include <cmath>
#include <limits>

#include "nlflow/errors.hpp"
#include "nlflow/quadrature.hpp"

using namespace nlflow;

TEST_CASE("adaptive Simpson integrates smooth functions") {
  const auto sine = adaptive_simpson([](double x) { return std::sin(x); }, 0.0, M_PI, 1e-12);
  CHECK(sine.value == doctest::Approx(2.0).epsilon(1e-11));
  CHECK(sine.error_estimate <= 1e-12);
  CHECK(sine.evaluations > 0);

  const auto cubic = adaptive_simpson([](double x) { return x * x * x; }, -1.0, 2.0, 1e-12);
  CHECK(cubic.value == doctest::Approx(3.75).epsilon(1e-14));

  const auto gauss =
      adaptive_simpson([](double x) { return std::exp(-x * x); }, -8.0, 8.0, 1e-12);
  CHECK(gauss.value == doctest::Approx(std::sqrt(M_PI)).epsilon(1e-11));
}

TEST_CASE("adaptive Simpson handles reversed and empty intervals") {
  const auto rev = adaptive_simpson([](double x) { return x; }, 1.0, 0.0, 1e-12);
  CHECK(rev.value == doctest::Approx(-0.5).epsilon(1e-14));
  CHECK(adaptive_simpson([](double) { return 1.0; }, 3.0, 3.0, 1e-12).value == 0.0);
}

TEST_CASE("adaptive Simpson reports failures") {
  CHECK_THROWS_AS(adaptive_simpson([](double) { return 1.0; }, 0.0, 1.0, 0.0), QuadratureError);
  CHECK_THROWS_AS(
      adaptive_simpson([](double x) { return x > 0.5 ? std::numeric_limits<double>::infinity() : 0.0; },
                       0.0, 1.0, 1e-10),
      QuadratureError);
  // 1/sqrt(x) near 0 with almost no depth cannot reach the tolerance
  CHECK_THROWS_AS(
      adaptive_simpson([](double x) { return 1.0 / std::sqrt(x); }, 1e-12, 1.0, 1e-12, 3),
      QuadratureError);
}
