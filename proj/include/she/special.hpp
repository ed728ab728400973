#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>

namespace she {

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kPi = 3.14159265358979323846264338327950288;
inline constexpr double kE = 2.71828182845904523536028747135266250;

// Principal-branch Lambert W on the positive axis.
// Halley iteration; seeded with log x - log log x for large x.
inline double lambert_w(double x) {
  if (!(x > 0.0)) throw std::invalid_argument("lambert_w: requires x > 0");
  double w;
  if (x < 1.0) {
    w = x * (1.0 - x);  // W(x) = x - x^2 + ...
  } else if (x < kE) {
    w = std::log1p(x) * 0.7;
  } else {
    const double lx = std::log(x);
    w = lx - std::log(lx);
  }
  for (int it = 0; it < 64; ++it) {
    const double ew = std::exp(w);
    const double f = w * ew - x;
    const double denom = ew * (w + 1.0) - (w + 2.0) * f / (2.0 * w + 2.0);
    const double dw = f / denom;
    w -= dw;
    if (std::abs(dw) <= 1e-15 * (std::abs(w) + 1e-300)) break;
  }
  return w;
}

// Regularized upper incomplete gamma Q(n, x) for integer n >= 1:
// Q(n,x) = e^{-x} sum_{k=0}^{n-1} x^k / k!, summed in log space.
inline double reg_gamma_q(int n, double x) {
  if (n < 1) throw std::invalid_argument("reg_gamma_q: n >= 1 required");
  if (x <= 0.0) return 1.0;
  // log of terms: -x + k log x - lgamma(k+1); sum via running max
  double maxlog = -kInf;
  const double lx = std::log(x);
  for (int k = 0; k < n; ++k) {
    const double lt = -x + k * lx - std::lgamma(k + 1.0);
    if (lt > maxlog) maxlog = lt;
  }
  if (maxlog == -kInf) return 0.0;
  double acc = 0.0;
  for (int k = 0; k < n; ++k) {
    const double lt = -x + k * lx - std::lgamma(k + 1.0);
    acc += std::exp(lt - maxlog);
  }
  const double q = std::exp(maxlog) * acc;
  return q > 1.0 ? 1.0 : q;
}

// log_+(x) = log(x v e); saturates at 1 for x <= e
inline double log_plus(double x) { return std::log(x > kE ? x : kE); }

// log^{(n)}: n-fold composition of log_+ (log^{(0)} = identity)
inline double iterated_log(int n, double r) {
  for (int i = 0; i < n; ++i) r = log_plus(r);
  return r;
}

// exp^{(n)}; levels that would overflow are reported symbolically:
// value = exp^{(levels_left)}(residual) with residual representable.
struct IterExp {
  int levels_left = 0;  // 0 means value is exact
  double residual = 0.0;
  bool overflowed() const { return levels_left > 0; }
  double value() const { return levels_left > 0 ? kInf : residual; }
};

inline IterExp iterated_exp_sym(int n, double r) {
  for (int i = 0; i < n; ++i) {
    if (r > 709.0) return {n - i, r};
    r = std::exp(r);
  }
  return {0, r};
}

inline double iterated_exp(int n, double r) { return iterated_exp_sym(n, r).value(); }

}  // namespace she
