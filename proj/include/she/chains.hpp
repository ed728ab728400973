#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "she/kernel.hpp"
#include "she/levy.hpp"
#include "she/rng.hpp"
#include "she/special.hpp"

namespace she {

struct ChainStep {
  double dtau = 0.0;               // gap to the previous atom
  std::vector<double> deta;        // spatial displacement, |deta| <= sqrt(dtau)
  double zeta = 0.0;               // mark (jump size)
};

struct BackwardChain {
  double t = 0.0;
  std::vector<double> x;
  std::vector<ChainStep> steps;    // retained steps, partial gap sums stay <= t
  double next_gap = 0.0;           // the gap that pushed the sum past t
};

// C = pi^{d/2} / Gamma(d/2 + 2); the gap law is 1 - e^{-C x^{1+d/2}}
inline double gap_distribution_constant(int d) {
  if (d < 1) throw std::invalid_argument("gap_distribution_constant: d >= 1");
  return std::pow(kPi, 0.5 * d) / std::tgamma(0.5 * d + 2.0);
}

namespace detail {

inline double mark_total_mass(const LevyMeasure& m) {
  return m.tail(1.0) + m.atom_at(1.0);
}

// one mark from lambda restricted and normalized to [1, inf)
inline double sample_mark(const LevyMeasure& m, double total, Rng& rng) {
  const double level = rng.uniform() * total;
  const double z = m.tail_inverse(level);
  return z < 1.0 ? 1.0 : z;
}

inline std::vector<double> sample_displacement(int d, double dtau, Rng& rng) {
  auto v = rng.uniform_ball(d);
  const double r = std::sqrt(dtau);
  for (auto& c : v) c *= r;
  return v;
}

}  // namespace detail

// Gaps i.i.d. with CDF 1 - e^{-C x^{1+d/2}}; displacements uniform on the
// sqrt(gap)-ball; marks from lambda on [1, inf). Stops at the first gap
// whose partial sum exceeds t; that gap is recorded as next_gap.
inline BackwardChain sample_backward_chain(double t, std::vector<double> x, int d,
                                           const LevyMeasure& measure, Rng& rng) {
  if (!(t > 0.0)) throw std::invalid_argument("sample_backward_chain: t > 0");
  const double total = detail::mark_total_mass(measure);
  if (!(total > 0.0))
    throw std::invalid_argument("sample_backward_chain: no mass on [1, inf)");
  const double C = gap_distribution_constant(d);
  const double inv_exp = 1.0 / (1.0 + 0.5 * d);
  BackwardChain chain;
  chain.t = t;
  chain.x = std::move(x);
  double elapsed = 0.0;
  for (;;) {
    const double u = rng.uniform();
    const double gap = std::pow(-std::log(1.0 - u) / C, inv_exp);
    if (elapsed + gap > t) {
      chain.next_gap = gap;
      return chain;
    }
    elapsed += gap;
    ChainStep s;
    s.dtau = gap;
    s.deta = detail::sample_displacement(d, gap, rng);
    s.zeta = detail::sample_mark(measure, total, rng);
    chain.steps.push_back(std::move(s));
  }
}

// P(A_N) = e^{-C t^{1+d/2}} (1 - e^{-C (t/N)^{1+d/2}})^N
inline double prob_A_N(double t, int N, int d) {
  if (N < 1 || !(t > 0.0)) throw std::invalid_argument("prob_A_N: N >= 1, t > 0");
  const double C = gap_distribution_constant(d);
  const double e = 1.0 + 0.5 * d;
  const double head = std::exp(-C * std::pow(t, e));
  const double per_gap = 1.0 - std::exp(-C * std::pow(t / N, e));
  return head * std::pow(per_gap, N);
}

// Exactly N gaps from the gap law truncated to (0, t/N) (the conditional
// density given A_N); displacements uniform on the sqrt(gap)-ball.
inline BackwardChain sample_conditional_chain(double t, int N, int d, Rng& rng) {
  if (N < 1 || !(t > 0.0))
    throw std::invalid_argument("sample_conditional_chain: N >= 1, t > 0");
  const double C = gap_distribution_constant(d);
  const double e = 1.0 + 0.5 * d;
  const double D = 1.0 - std::exp(-C * std::pow(t / N, e));
  BackwardChain chain;
  chain.t = t;
  chain.steps.reserve(static_cast<std::size_t>(N));
  for (int i = 0; i < N; ++i) {
    const double u = rng.uniform();
    ChainStep s;
    s.dtau = std::pow(-std::log(1.0 - u * D) / C, 1.0 / e);
    s.deta = detail::sample_displacement(d, s.dtau, rng);
    chain.steps.push_back(std::move(s));
  }
  return chain;
}

// Exact P(prod_{i=1}^N Y_i > R) for i.i.d. Pareto(alpha, scale c):
// sum of log(Y_i / c) is Gamma(N, alpha), so the tail is the regularized
// upper incomplete gamma Q(N, alpha log(R / c^N)).
inline double product_pareto_tail(int N, double alpha, double c, double R) {
  if (N < 1 || !(alpha > 0) || !(c > 0) || !(R > 0))
    throw std::invalid_argument("product_pareto_tail: bad arguments");
  const double arg = alpha * (std::log(R) - N * std::log(c));
  if (arg <= 0.0) return 1.0;
  return reg_gamma_q(N, arg);
}

struct ScanRow {
  int N = 0;
  double p_AN_closed = 0.0;
  double p_AN_mc = 0.0;
  double cond_estimate = 0.0;
  double summand = 0.0;  // p_AN_closed * cond_estimate
};

struct ScanResult {
  std::vector<ScanRow> rows;
  int optimal_N = 0;      // arg max of summand, ties toward smaller N
  double total = 0.0;     // sum of summands, a lower bound on P(Y(t,x) > R)
};

// Monte Carlo estimate of P(prod g(dtau_i, deta_i) zeta_i > R | A_N) for
// each N in [N_lo, N_hi], marks from lambda on [1, inf). Valid only when
// the small-jump part vanishes, so each chain term is the bare product.
inline ScanResult lower_bound_scan(double t, int d, const LevyMeasure& measure,
                                   double R, int N_lo, int N_hi,
                                   std::uint64_t replications, std::uint64_t seed) {
  if (N_lo < 1 || N_hi < N_lo)
    throw std::invalid_argument("lower_bound_scan: need 1 <= N_lo <= N_hi");
  const double total_mark = detail::mark_total_mass(measure);
  if (!(total_mark > 0.0))
    throw std::invalid_argument("lower_bound_scan: no mass on [1, inf)");
  const double logR = std::log(R);
  ScanResult out;
  // empirical P(A_N) from unconditioned chains, one shared pass
  std::vector<std::uint64_t> hits(static_cast<std::size_t>(N_hi) + 1, 0);
  {
    Rng rng = Rng::for_replication(seed, 0);
    for (std::uint64_t r = 0; r < replications; ++r) {
      const auto chain = sample_backward_chain(t, std::vector<double>(d, 0.0), d,
                                               measure, rng);
      const int n = static_cast<int>(chain.steps.size());
      if (n < N_lo || n > N_hi || chain.next_gap <= t) continue;
      bool ok = true;
      for (const auto& s : chain.steps)
        if (s.dtau > t / n) { ok = false; break; }
      if (ok) ++hits[static_cast<std::size_t>(n)];
    }
  }
  for (int N = N_lo; N <= N_hi; ++N) {
    Rng rng = Rng::for_replication(seed, static_cast<std::uint64_t>(N));
    std::uint64_t exceed = 0;
    for (std::uint64_t r = 0; r < replications; ++r) {
      const auto chain = sample_conditional_chain(t, N, d, rng);
      double logprod = 0.0;
      for (const auto& s : chain.steps) {
        double n2 = 0.0;
        for (double c : s.deta) n2 += c * c;
        logprod += log_heat_kernel(d, s.dtau, n2);
        logprod += std::log(detail::sample_mark(measure, total_mark, rng));
      }
      if (logprod > logR) ++exceed;
    }
    ScanRow row;
    row.N = N;
    row.p_AN_closed = prob_A_N(t, N, d);
    row.p_AN_mc = static_cast<double>(hits[static_cast<std::size_t>(N)]) /
                  static_cast<double>(replications);
    row.cond_estimate = static_cast<double>(exceed) / static_cast<double>(replications);
    row.summand = row.p_AN_closed * row.cond_estimate;
    out.total += row.summand;
    out.rows.push_back(row);
  }
  out.optimal_N = out.rows.front().N;
  double best = -1.0;
  for (const auto& r : out.rows)
    if (r.summand > best) { best = r.summand; out.optimal_N = r.N; }
  return out;
}

}  // namespace she
