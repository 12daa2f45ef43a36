#include "nlflow/quadrature.hpp"

#include <cmath>

#include <fmt/format.h>

#include "nlflow/errors.hpp"

namespace nlflow {
namespace {

struct Simpson {
  const std::function<double(double)>& f;
  long evaluations = 0;
  bool failed = false;

  double eval(double x) {
    ++evaluations;
    const double y = f(x);
    if (!std::isfinite(y)) {
      throw QuadratureError(fmt::format("non-finite integrand at x = {}", x));
    }
    return y;
  }

  // Integrates [a, b] given f(a), f(m), f(b) and the whole-interval estimate.
  double recurse(double a, double fa, double m, double fm, double b, double fb,
                 double whole, double tol, int depth, double& err) {
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = eval(lm);
    const double frm = eval(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (std::abs(delta) <= 15.0 * tol || (b - a) <= 1e-15 * std::abs(a)) {
      err += std::abs(delta) / 15.0;
      return left + right + delta / 15.0;
    }
    if (depth <= 0) {
      failed = true;
      err += std::abs(delta) / 15.0;
      return left + right + delta / 15.0;
    }
    return recurse(a, fa, lm, flm, m, fm, left, 0.5 * tol, depth - 1, err) +
           recurse(m, fm, rm, frm, b, fb, right, 0.5 * tol, depth - 1, err);
  }
};

}  // namespace

QuadratureResult adaptive_simpson(const std::function<double(double)>& f,
                                  double a, double b, double abs_tol,
                                  int max_depth) {
  if (!(abs_tol > 0.0)) {
    throw QuadratureError("tolerance must be positive");
  }
  if (a == b) return {};
  Simpson s{f};
  const double fa = s.eval(a);
  const double fb = s.eval(b);
  const double m = 0.5 * (a + b);
  const double fm = s.eval(m);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  double err = 0.0;
  const double value = s.recurse(a, fa, m, fm, b, fb, whole, abs_tol, max_depth, err);
  if (s.failed && err > abs_tol) {
    throw QuadratureError(fmt::format(
        "adaptive Simpson on [{}, {}] did not reach tolerance {} (estimate {})",
        a, b, abs_tol, err));
  }
  return {value, err, s.evaluations};
}

}  // namespace nlflow
