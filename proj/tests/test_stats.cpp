#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "nlflow/errors.hpp"
#include "nlflow/rng.hpp"
#include "nlflow/stats.hpp"

using namespace nlflow;

TEST_CASE("pairwise sum") {
  std::vector<double> v(1000, 0.1);
  CHECK(stats::pairwise_sum(v) == doctest::Approx(100.0).epsilon(1e-14));
  CHECK(stats::pairwise_sum(std::vector<double>{}) == 0.0);
}

TEST_CASE("summarize") {
  const auto s = stats::summarize(std::vector<double>{1.0, 2.0, 3.0, 4.0});
  CHECK(s.n == 4);
  CHECK(s.mean == 2.5);
  CHECK(s.variance == doctest::Approx(5.0 / 3.0));
  CHECK(s.std_error == doctest::Approx(std::sqrt(5.0 / 12.0)));
  CHECK(s.ci_halfwidth == doctest::Approx(1.96 * s.std_error));
  const auto c = stats::summarize(std::vector<double>(10, 0.3));
  CHECK(c.mean == 0.3);
  CHECK(c.variance == 0.0);
  CHECK(c.ci_halfwidth == 0.0);
  CHECK_THROWS_AS(stats::summarize(std::vector<double>{1.0}), SamplingError);
}

TEST_CASE("doubling the sample shrinks the CI by sqrt 2") {
  rng::Stream rs(17);
  std::vector<double> v(20000);
  for (double& x : v) x = rs.normal();
  const auto half = stats::summarize(std::span<const double>(v.data(), 10000));
  const auto full = stats::summarize(v);
  const double ratio = half.ci_halfwidth / full.ci_halfwidth;
  CHECK(ratio == doctest::Approx(std::sqrt(2.0)).epsilon(0.2));
}

TEST_CASE("proportion half-width") {
  CHECK(stats::proportion_halfwidth(0.5, 100) == doctest::Approx(0.098));
  CHECK(stats::proportion_halfwidth(0.0, 100) == 0.0);
}

TEST_CASE("ordinary least squares") {
  const std::vector<double> x{0, 1, 2, 3};
  const std::vector<double> y{1, 3, 5, 7};
  const auto f = stats::ordinary_least_squares(x, y);
  CHECK(f.slope == doctest::Approx(2.0));
  CHECK(f.intercept == doctest::Approx(1.0));
  CHECK(f.r_squared == doctest::Approx(1.0));
  CHECK(f.n == 4);
  const auto flat = stats::ordinary_least_squares(x, std::vector<double>{2, 2, 2, 2});
  CHECK(flat.slope == 0.0);
  CHECK(flat.r_squared == 1.0);
  CHECK_THROWS_AS(stats::ordinary_least_squares(std::vector<double>{1}, std::vector<double>{1}),
                  RegressionError);
  CHECK_THROWS_AS(stats::ordinary_least_squares(std::vector<double>{1, 1}, std::vector<double>{1, 2}),
                  RegressionError);
  CHECK_THROWS_AS(stats::ordinary_least_squares(std::vector<double>{1, NAN}, std::vector<double>{1, 2}),
                  RegressionError);
}

TEST_CASE("parallel_map keeps index order and is worker independent") {
  const std::function<double(std::size_t)> fn = [](std::size_t i) { return std::sqrt(double(i)); };
  stats::set_worker_count(1);
  const auto one = stats::parallel_map<double>(257, fn);
  stats::set_worker_count(4);
  const auto four = stats::parallel_map<double>(257, fn);
  stats::set_worker_count(0);
  CHECK(one == four);
  for (std::size_t i = 0; i < one.size(); ++i) CHECK(one[i] == std::sqrt(double(i)));
}

TEST_CASE("parallel_map rethrows the lowest failing index") {
  stats::set_worker_count(3);
  const std::function<int(std::size_t)> fn = [](std::size_t i) -> int {
    if (i == 7 || i == 4 || i == 11) throw std::runtime_error(std::to_string(i));
    return 0;
  };
  try {
    stats::parallel_map<int>(20, fn);
    FAIL("expected an exception");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()) == "4");
  }
  stats::set_worker_count(0);
}
