#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace she {

struct MeanStderr {
  double mean = 0.0;
  double stderr_ = 0.0;
  std::size_t n = 0;
};

inline MeanStderr mean_stderr(std::span<const double> xs) {
  MeanStderr r;
  r.n = xs.size();
  if (r.n == 0) return r;
  double s = 0.0;
  for (double x : xs) s += x;
  r.mean = s / static_cast<double>(r.n);
  double ss = 0.0;
  for (double x : xs) ss += (x - r.mean) * (x - r.mean);
  if (r.n > 1) r.stderr_ = std::sqrt(ss / (static_cast<double>(r.n) * (r.n - 1.0)));
  return r;
}

inline double binomial_stderr(double phat, std::size_t n) {
  if (n == 0) return 0.0;
  return std::sqrt(phat * (1.0 - phat) / static_cast<double>(n));
}

struct OlsFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  double slope_stderr = 0.0;
  std::size_t n = 0;
};

inline OlsFit ols(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::invalid_argument("ols: need >= 2 matched points");
  OlsFit f;
  f.n = x.size();
  const double n = static_cast<double>(f.n);
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < f.n; ++i) { sx += x[i]; sy += y[i]; }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < f.n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0) throw std::invalid_argument("ols: degenerate x");
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ssr = 0.0;
  for (std::size_t i = 0; i < f.n; ++i) {
    const double e = y[i] - (f.intercept + f.slope * x[i]);
    ssr += e * e;
  }
  f.r2 = syy > 0 ? 1.0 - ssr / syy : 1.0;
  if (f.n > 2) f.slope_stderr = std::sqrt(ssr / ((n - 2.0) * sxx));
  return f;
}

// Asymptotic Kolmogorov distribution: P(K > x) = 2 sum (-1)^{k-1} e^{-2 k^2 x^2}
inline double kolmogorov_pvalue(double stat, std::size_t n) {
  const double x = stat * (std::sqrt(static_cast<double>(n)) + 0.12 +
                           0.11 / std::sqrt(static_cast<double>(n)));
  if (x < 0.2) return 1.0;
  double p = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = 2.0 * std::pow(-1.0, k - 1) * std::exp(-2.0 * k * k * x * x);
    p += term;
    if (std::abs(term) < 1e-12) break;
  }
  return std::clamp(p, 0.0, 1.0);
}

// One-sample KS test of samples against a CDF callable.
template <typename Cdf>
double ks_test_pvalue(std::vector<double> samples, const Cdf& cdf) {
  if (samples.empty()) throw std::invalid_argument("ks_test: empty sample");
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double c = cdf(samples[i]);
    d = std::max(d, std::abs(c - static_cast<double>(i) / n));
    d = std::max(d, std::abs(static_cast<double>(i + 1) / n - c));
  }
  return kolmogorov_pvalue(d, samples.size());
}

}  // namespace she
