#pragma once

#include <cmath>
#include <functional>

namespace she {

namespace detail {

template <typename F>
double adaptive_simpson_rec(const F& f, double a, double b, double fa, double fm,
                            double fb, double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) {
    return left + right + delta / 15.0;
  }
  return adaptive_simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         adaptive_simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace detail

// Adaptive Simpson on [a,b]; tol is an absolute tolerance.
template <typename F>
double integrate(const F& f, double a, double b, double tol = 1e-10,
                 int max_depth = 40) {
  if (a == b) return 0.0;
  const double m = 0.5 * (a + b);
  const double fa = f(a);
  const double fm = f(m);
  const double fb = f(b);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return detail::adaptive_simpson_rec(f, a, b, fa, fm, fb, whole, tol, max_depth);
}

// Semi-infinite integral by mapping [0,inf) -> (0,1] via s = u/(1-u).
template <typename F>
double integrate_to_inf(const F& f, double a, double tol = 1e-10) {
  auto g = [&](double u) {
    const double s = u / (1.0 - u);
    const double jac = 1.0 / ((1.0 - u) * (1.0 - u));
    return f(a + s) * jac;
  };
  return integrate(g, 0.0, 1.0 - 1e-12, tol);
}

}  // namespace she
