#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "she/quadrature.hpp"
#include "she/rng.hpp"
#include "she/special.hpp"
#include "she/stats.hpp"

namespace she {

struct LemmaCheckResult {
  std::string id;
  std::string inputs;
  double lhs = 0.0;     // worst-case side values across the sweep
  double rhs = 0.0;
  double margin = 0.0;  // min(rhs - lhs) over the sweep, sign carries the verdict
  bool pass = false;
};

// log x - log log x <= W(x) <= log x - (1/2) log log x on [x0, inf)
inline LemmaCheckResult lambert_w_bounds_check(const std::vector<double>& x_grid) {
  LemmaCheckResult res;
  res.id = "lambert_w_bounds";
  res.inputs = "grid n=" + std::to_string(x_grid.size());
  res.margin = kInf;
  double first_ok = kInf;
  bool all_after = true;
  for (auto it = x_grid.rbegin(); it != x_grid.rend(); ++it) {
    const double x = *it;
    if (!(x >= 3.0)) continue;
    const double w = lambert_w(x);
    const double ll = std::log(std::log(x));
    const double lo = std::log(x) - ll;
    const double hi = std::log(x) - 0.5 * ll;
    const double m = std::min(w - lo, hi - w);
    if (m < res.margin) {
      res.margin = m;
      res.lhs = lo;
      res.rhs = hi;
    }
    if (m >= 0.0 && all_after) first_ok = x;
    else all_after = false;
  }
  res.pass = res.margin >= 0.0;
  res.inputs += ", holds from x=" + std::to_string(first_ok);
  return res;
}

struct IterIntClosed {
  double value = 0.0;
  std::vector<double> coefficients;  // c_{N,0} .. c_{N,N-1}
};

// H_{N;alpha,beta}(R) = sum_i c_{N,i} (log R)^i with
// c_{N,i} = N^i Gamma(N-i+beta) / (i! (N-i-1)! (alpha+1)^{N-i+beta});
// coefficients span many orders of magnitude, so everything goes through
// log-Gamma (all factors are positive here).
inline IterIntClosed iter_int_closed(int N, double alpha, double beta, double R) {
  if (N < 1 || !(alpha > -1.0) || !(beta > -1.0) || !(R >= 1.0))
    throw std::invalid_argument("iter_int_closed: need N>=1, alpha,beta>-1, R>=1");
  IterIntClosed out;
  const double lR = std::log(R);
  const double la1 = std::log(alpha + 1.0);
  for (int i = 0; i < N; ++i) {
    const double lc = i * std::log(static_cast<double>(N)) +
                      std::lgamma(N - i + beta) - std::lgamma(i + 1.0) -
                      std::lgamma(static_cast<double>(N - i)) -
                      (N - i + beta) * la1;
    const double c = std::exp(lc);
    out.coefficients.push_back(c);
    out.value += c * std::pow(lR, i);
  }
  return out;
}

struct OracleValue {
  double value = 0.0;
  double error = 0.0;  // quadrature tolerance or Monte Carlo stderr
};

namespace detail {

// I(n, p) = int over [0,R]^n of (p prod y)^alpha (log(1/(p prod y)))^beta
// restricted to p prod y <= 1; evaluated by nested adaptive quadrature
inline double iter_int_nested(int n, double p, double alpha, double beta, double R,
                              double tol) {
  if (n == 0) {
    if (p > 1.0) return 0.0;
    const double l = std::log(1.0 / p);
    return std::pow(p, alpha) * (beta == 0.0 ? 1.0 : std::pow(l, beta));
  }
  // only the innermost variable can be truncated at 1/p: outer variables may
  // exceed it when later factors bring the product back under 1
  const double upper = n == 1 ? std::min(R, 1.0 / p) : R;
  if (!(upper > 0.0)) return 0.0;
  // substitute y = u^2: tames the logarithmic endpoint singularity at 0
  auto f = [&](double u) {
    const double y = u * u;
    if (!(y > 0.0)) return 0.0;
    return 2.0 * u * iter_int_nested(n - 1, p * y, alpha, beta, R, tol * 0.1);
  };
  return integrate(f, 0.0, std::sqrt(upper), tol, 28);
}

}  // namespace detail

// Defining N-fold integral of Lemma-style iterated integrals:
// int_{[0,R]^N} (y_1...y_N)^alpha (log 1/(y_1...y_N))^beta 1{prod <= 1} dy.
inline OracleValue iter_int_quadrature(int N, double alpha, double beta, double R) {
  if (N < 1 || N > 3)
    throw std::invalid_argument("iter_int_quadrature: N in {1,2,3} only");
  OracleValue v;
  const double tol = N == 3 ? 1e-7 : 1e-9;
  v.value = detail::iter_int_nested(N, 1.0, alpha, beta, R, tol);
  v.error = tol * 50.0;
  return v;
}

inline OracleValue iter_int_monte_carlo(int N, double alpha, double beta, double R,
                                        std::uint64_t samples, std::uint64_t seed) {
  Rng rng = Rng::for_replication(seed, 0);
  double sum = 0.0, sumsq = 0.0;
  const double volume = std::pow(R, N);
  for (std::uint64_t i = 0; i < samples; ++i) {
    double logprod = 0.0;
    for (int j = 0; j < N; ++j) logprod += std::log(rng.uniform(0.0, R));
    double w = 0.0;
    if (logprod <= 0.0)
      w = std::exp(alpha * logprod) *
          (beta == 0.0 ? 1.0 : std::pow(-logprod, beta));
    sum += w;
    sumsq += w * w;
  }
  const double n = static_cast<double>(samples);
  OracleValue v;
  v.value = volume * sum / n;
  const double var = std::max(0.0, sumsq / n - (sum / n) * (sum / n));
  v.error = volume * std::sqrt(var / n);
  return v;
}

// sum_{N>=0} z^N / Gamma(alpha N + beta)^{1/gamma}
inline double gamma_power_series(double alpha, double beta, double gamma, double z) {
  if (!(alpha > 0.0) || !(beta > 0.0) || !(gamma > 0.0))
    throw std::invalid_argument("gamma_power_series: positive parameters required");
  double sum = 0.0;
  const double lz = z > 0.0 ? std::log(z) : -kInf;
  for (int N = 0; N < 100000; ++N) {
    const double lt =
        N == 0 ? -std::lgamma(beta) / gamma
               : (z == 0.0 ? -kInf
                           : N * lz - std::lgamma(alpha * N + beta) / gamma);
    const double term = std::exp(lt);
    sum += term;
    if (N > 2 && term < 1e-16 * sum) break;
  }
  return sum;
}

// Existence check: is there C on the grid with
// series(z) <= (gamma/alpha) C e^{C z^{gamma/alpha}} for every grid z?
inline LemmaCheckResult gamma_series_bound_check(double alpha, double beta,
                                                 double gamma,
                                                 const std::vector<double>& z_grid,
                                                 const std::vector<double>& C_grid) {
  LemmaCheckResult res;
  res.id = "gamma_series_bound";
  res.inputs = "alpha=" + std::to_string(alpha) + " beta=" + std::to_string(beta) +
               " gamma=" + std::to_string(gamma);
  const double ex = gamma / alpha;
  for (double C : C_grid) {
    bool ok = true;
    double worst = kInf;
    double wl = 0, wr = 0;
    for (double z : z_grid) {
      const double lhs = gamma_power_series(alpha, beta, gamma, z);
      const double rhs = (gamma / alpha) * C * std::exp(C * std::pow(z, ex));
      if (rhs - lhs < worst) {
        worst = rhs - lhs;
        wl = lhs;
        wr = rhs;
      }
      if (lhs > rhs) {
        ok = false;
        break;
      }
    }
    if (ok) {
      res.pass = true;
      res.lhs = wl;
      res.rhs = wr;
      res.margin = worst;
      res.inputs += " C=" + std::to_string(C);
      return res;
    }
  }
  res.pass = false;
  res.margin = -kInf;
  res.inputs += " no grid C works";
  return res;
}

struct DiscreteLaw {
  std::vector<double> values;  // nonnegative
  std::vector<double> probs;   // sums to 1
};

// P(X > delta E[X]) >= (1-delta)^{p/(p-1)} E[X]^{p/(p-1)} / E[X^p]^{1/(p-1)}
// and E[X^a] >= 2^{-a-p/(p-1)} E[X]^{a+p/(p-1)} / E[X^p]^{1/(p-1)},
// evaluated exactly on a discrete law.
inline LemmaCheckResult paley_zygmund_check(const DiscreteLaw& law, double a,
                                            double delta, double p) {
  if (!(a > 0.0) || !(a < 1.0) || !(delta > 0.0) || !(delta < 1.0) || !(p > 1.0))
    throw std::invalid_argument("paley_zygmund_check: bad parameters");
  double EX = 0.0, EXp = 0.0, EXa = 0.0;
  for (std::size_t i = 0; i < law.values.size(); ++i) {
    EX += law.probs[i] * law.values[i];
    EXp += law.probs[i] * std::pow(law.values[i], p);
    EXa += law.probs[i] * std::pow(law.values[i], a);
  }
  double Ptail = 0.0;
  for (std::size_t i = 0; i < law.values.size(); ++i)
    if (law.values[i] > delta * EX) Ptail += law.probs[i];
  const double q = p / (p - 1.0);
  const double rhs1 =
      std::pow(1.0 - delta, q) * std::pow(EX, q) / std::pow(EXp, 1.0 / (p - 1.0));
  const double rhs2 = std::pow(2.0, -a - q) * std::pow(EX, a + q) /
                      std::pow(EXp, 1.0 / (p - 1.0));
  LemmaCheckResult res;
  res.id = "paley_zygmund";
  res.inputs = "a=" + std::to_string(a) + " delta=" + std::to_string(delta) +
               " p=" + std::to_string(p);
  const double m1 = Ptail - rhs1;
  const double m2 = EXa - rhs2;
  res.margin = std::min(m1, m2);
  if (m1 <= m2) {
    res.lhs = rhs1;
    res.rhs = Ptail;
  } else {
    res.lhs = rhs2;
    res.rhs = EXa;
  }
  res.pass = res.margin >= 0.0;
  return res;
}

struct DecouplingToy {
  double rate = 3.0;        // Poisson atom intensity on [0,1]
  int count_cap = 5;        // H(t-) = 1 + min(prior atom count, cap)
  double mark_alpha = 1.0;  // Pareto index of the marks
};

// One draw of X = sum_i H(t_i-) zeta_i; decoupled = true replaces the
// running count by that of an independent atom configuration.
inline double decoupling_toy_draw(const DecouplingToy& toy, bool decoupled,
                                  Rng& rng) {
  const auto n = rng.poisson(toy.rate);
  std::vector<double> times(n);
  for (auto& t : times) t = rng.uniform();
  std::sort(times.begin(), times.end());
  std::vector<double> ref_times;
  if (decoupled) {
    const auto m = rng.poisson(toy.rate);
    ref_times.resize(m);
    for (auto& t : ref_times) t = rng.uniform();
    std::sort(ref_times.begin(), ref_times.end());
  }
  double x = 0.0;
  for (std::uint64_t i = 0; i < n; ++i) {
    std::uint64_t prior;
    if (decoupled) {
      prior = static_cast<std::uint64_t>(
          std::lower_bound(ref_times.begin(), ref_times.end(), times[i]) -
          ref_times.begin());
    } else {
      prior = i;
    }
    const double H =
        1.0 + static_cast<double>(std::min<std::uint64_t>(
                  prior, static_cast<std::uint64_t>(toy.count_cap)));
    const double zeta = std::pow(rng.uniform(), -1.0 / toy.mark_alpha);
    x += H * zeta;
  }
  return x;
}

// P(X > R) <= 7 theta P(X > R/3) + 2 Pbar(X' > R/6) + theta^{-1} Pbar(X' > theta R/6)
inline LemmaCheckResult decoupling_check(const DecouplingToy& toy, double th,
                                         const std::vector<double>& R_grid,
                                         std::uint64_t replications,
                                         std::uint64_t seed) {
  if (!(th > 0.0) || !(th < 1.0))
    throw std::invalid_argument("decoupling_check: theta in (0,1)");
  std::vector<double> X(replications), Xp(replications);
  for (std::uint64_t i = 0; i < replications; ++i) {
    Rng rng = Rng::for_replication(seed, i);
    X[i] = decoupling_toy_draw(toy, false, rng);
    Xp[i] = decoupling_toy_draw(toy, true, rng);
  }
  std::sort(X.begin(), X.end());
  std::sort(Xp.begin(), Xp.end());
  const double n = static_cast<double>(replications);
  auto surv = [&](const std::vector<double>& v, double R) {
    return static_cast<double>(v.end() - std::upper_bound(v.begin(), v.end(), R)) / n;
  };
  LemmaCheckResult res;
  res.id = "decoupling";
  res.inputs = "theta=" + std::to_string(th) + " reps=" + std::to_string(replications);
  res.margin = kInf;
  res.pass = true;
  for (double R : R_grid) {
    const double p = surv(X, R);
    const double p3 = surv(X, R / 3.0);
    const double q6 = surv(Xp, R / 6.0);
    const double qt = surv(Xp, th * R / 6.0);
    const double rhs = 7.0 * th * p3 + 2.0 * q6 + qt / th;
    const double se = std::sqrt(
        binomial_stderr(p, replications) * binomial_stderr(p, replications) +
        49.0 * th * th * binomial_stderr(p3, replications) *
            binomial_stderr(p3, replications) +
        4.0 * binomial_stderr(q6, replications) * binomial_stderr(q6, replications) +
        binomial_stderr(qt, replications) * binomial_stderr(qt, replications) /
            (th * th));
    const double m = rhs + 4.0 * se - p;
    if (m < res.margin) {
      res.margin = m;
      res.lhs = p;
      res.rhs = rhs;
    }
    if (m < 0.0) res.pass = false;
  }
  return res;
}

}  // namespace she
