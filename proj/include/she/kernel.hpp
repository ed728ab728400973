#pragma once

#include <cmath>
#include <span>
#include <stdexcept>

#include "she/special.hpp"

namespace she {

// log g(t,x) for the d-dimensional Gaussian kernel with variance t;
// -inf for t <= 0. Chain products multiply hundreds of kernels, so all
// downstream code should accumulate in log space.
inline double log_heat_kernel(int d, double t, double x_norm2) {
  if (d < 1) throw std::invalid_argument("log_heat_kernel: d >= 1 required");
  if (!(t > 0.0)) return -kInf;
  return -0.5 * d * std::log(2.0 * kPi * t) - x_norm2 / (2.0 * t);
}

inline double heat_kernel(int d, double t, double x_norm2) {
  const double l = log_heat_kernel(d, t, x_norm2);
  return l == -kInf ? 0.0 : std::exp(l);
}

inline double heat_kernel(int d, double t, std::span<const double> x) {
  double n2 = 0.0;
  for (double c : x) n2 += c * c;
  return heat_kernel(d, t, n2);
}

// exponent controlling the time singularity of int g^p dx
inline double theta(double p, int d) { return 1.0 - 0.5 * d * (p - 1.0); }

// int_{R^d} g(s,y)^p dy = (2 pi s)^{-d(p-1)/2} p^{-d/2}
inline double kernel_power_space_integral(double p, double s, int d) {
  if (!(s > 0.0) || !(p > 0.0))
    throw std::invalid_argument("kernel_power_space_integral: s > 0, p > 0 required");
  return std::pow(2.0 * kPi * s, -0.5 * d * (p - 1.0)) * std::pow(p, -0.5 * d);
}

// int_0^{t0} s^{-(d/2)(alpha-1)} ds = t0^theta / theta, +inf when theta <= 0
inline double singularity_time_integral(double alpha, double t0, int d) {
  if (!(t0 > 0.0))
    throw std::invalid_argument("singularity_time_integral: t0 > 0 required");
  const double th = theta(alpha, d);
  if (th <= 0.0) return kInf;
  return std::pow(t0, th) / th;
}

}  // namespace she
