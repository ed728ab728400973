// End-to-end acceptance checks. Each numbered block prints exactly one
// pass/fail line; the process exits nonzero if any block fails.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "she/analysis.hpp"
#include "she/chains.hpp"
#include "she/dimension.hpp"
#include "she/lemmas.hpp"
#include "she/runner.hpp"
#include "she/solver.hpp"

using namespace she;

namespace {

int failures = 0;

void report(const std::string& id, const std::string& what, bool ok,
            const std::string& detail = "") {
  std::printf("%s %s: %s%s%s\n", id.c_str(), what.c_str(), ok ? "pass" : "FAIL",
              detail.empty() ? "" : "  ", detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", x);
  return buf;
}

Box box1(double lo, double hi) {
  Box b;
  b.lo = {lo};
  b.hi = {hi};
  return b;
}

double quantile(std::vector<double> xs, double q) {
  std::sort(xs.begin(), xs.end());
  return xs[static_cast<std::size_t>(q * (xs.size() - 1))];
}

double exceed_frac(const std::vector<double>& xs, double R) {
  std::uint64_t c = 0;
  for (double x : xs)
    if (x > R) ++c;
  return static_cast<double>(c) / static_cast<double>(xs.size());
}

// ---------------------------------------------------------------- A1
void a1_iterated_integrals() {
  bool ok = true;
  double worst = 0.0;
  for (int N : {1, 2, 3})
    for (double alpha : {0.0, 0.5})
      for (double beta : {0.0, 1.0})
        for (double R : {2.0, 10.0}) {
          const double closed = iter_int_closed(N, alpha, beta, R).value;
          const auto orc = iter_int_quadrature(N, alpha, beta, R);
          const double rel = std::abs(closed - orc.value) / closed;
          worst = std::max(worst, rel);
          if (rel > 1e-6) ok = false;
        }
  const int N = 5;
  const double alpha = 0.5, beta = 1.0, R = 3.0;
  const double closed = iter_int_closed(N, alpha, beta, R).value;
  const auto mc = iter_int_monte_carlo(N, alpha, beta, R, 10'000'000, 1001);
  const bool mc_ok = std::abs(closed - mc.value) <= 3.0 * mc.error;
  report("A1", "iterated-integral closed form vs quadrature and Monte Carlo",
         ok && mc_ok,
         "worst_rel=" + fmt(worst) + " mc_dev_sigma=" +
             fmt(std::abs(closed - mc.value) / mc.error));
}

// ---------------------------------------------------------------- A2
void a2_product_tail() {
  const double exact2 = product_pareto_tail(2, 1.0, 1.0, 10.0);
  const bool pin_ok =
      std::abs(exact2 - (1.0 + std::log(10.0)) / 10.0) < 1e-12;
  const std::uint64_t reps = 10'000'000;
  std::vector<std::uint64_t> hits(2, 0);
  const double logR[2] = {std::log(10.0), std::log(100.0)};
  Rng rng = Rng::for_replication(1002, 0);
  for (std::uint64_t i = 0; i < reps; ++i) {
    double lp = 0.0;
    for (int j = 0; j < 3; ++j) lp -= std::log(rng.uniform());
    if (lp > logR[0]) ++hits[0];
    if (lp > logR[1]) ++hits[1];
  }
  bool mc_ok = true;
  double worst_sigma = 0.0;
  for (int k = 0; k < 2; ++k) {
    const double R = k == 0 ? 10.0 : 100.0;
    const double p = product_pareto_tail(3, 1.0, 1.0, R);
    const double phat = static_cast<double>(hits[k]) / static_cast<double>(reps);
    const double sigma = std::abs(phat - p) / binomial_stderr(p, reps);
    worst_sigma = std::max(worst_sigma, sigma);
    if (sigma > 4.0) mc_ok = false;
  }
  report("A2", "product-of-power-laws tail, exact value and Monte Carlo",
         pin_ok && mc_ok, "worst_sigma=" + fmt(worst_sigma));
}

// ---------------------------------------------------------------- A3
void a3_chain_law() {
  const auto measure = LevyMeasure::pareto_tail(1.0);
  bool freq_ok = true, ks_ok = true;
  double worst_sigma = 0.0, worst_p = 1.0;
  int combo = 0;
  for (int d : {1, 2}) {
    for (double t : {0.5, 1.0}) {
      const std::uint64_t reps = 1'000'000;
      std::vector<std::uint64_t> hits(4, 0);
      Rng rng = Rng::for_replication(1003, static_cast<std::uint64_t>(combo));
      for (std::uint64_t i = 0; i < reps; ++i) {
        const auto c = sample_backward_chain(t, std::vector<double>(d, 0.0), d,
                                             measure, rng);
        const int n = static_cast<int>(c.steps.size());
        if (n < 1 || n > 3 || c.next_gap <= t) continue;
        bool all_short = true;
        for (const auto& s : c.steps)
          if (s.dtau > t / n) { all_short = false; break; }
        if (all_short) ++hits[static_cast<std::size_t>(n)];
      }
      for (int N = 1; N <= 3; ++N) {
        const double p = prob_A_N(t, N, d);
        const double phat =
            static_cast<double>(hits[static_cast<std::size_t>(N)]) /
            static_cast<double>(reps);
        const double sigma = std::abs(phat - p) / binomial_stderr(p, reps);
        worst_sigma = std::max(worst_sigma, sigma);
        if (sigma > 4.0) freq_ok = false;

        // conditional gap law against the truncated closed form
        Rng crng = Rng::for_replication(1004, static_cast<std::uint64_t>(
                                                  100 * combo + 10 * N + d));
        const double C = gap_distribution_constant(d);
        const double e = 1.0 + 0.5 * d;
        const double D = 1.0 - std::exp(-C * std::pow(t / N, e));
        std::vector<double> gaps;
        for (int i = 0; i < 6000; ++i) {
          const auto c = sample_conditional_chain(t, N, d, crng);
          for (const auto& s : c.steps) gaps.push_back(s.dtau);
        }
        const double pv = ks_test_pvalue(gaps, [&](double x) {
          return (1.0 - std::exp(-C * std::pow(x, e))) / D;
        });
        worst_p = std::min(worst_p, pv);
        if (pv <= 0.01) ks_ok = false;
      }
      ++combo;
    }
  }
  report("A3", "chain gap frequencies and conditional law", freq_ok && ks_ok,
         "worst_sigma=" + fmt(worst_sigma) + " worst_ks_p=" + fmt(worst_p));
}

// ---------------------------------------------------------------- A4
void a4_lambert() {
  bool res_ok = true;
  double worst = 0.0;
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    const double x = 0.01 * std::pow(1e14, i / (n - 1.0));
    const double w = lambert_w(x);
    const double rel = std::abs(w * std::exp(w) - x) / std::max(1.0, x);
    worst = std::max(worst, rel);
    if (rel > 1e-12) res_ok = false;
  }
  // two-sided elementary bounds must hold from some point at or below 10
  double holds_from = kInf;
  for (double x = 1e8; x >= 3.0; x /= 1.02) {
    const double w = lambert_w(x);
    const double ll = std::log(std::log(x));
    if (w >= std::log(x) - ll && w <= std::log(x) - 0.5 * ll) holds_from = x;
    else break;
  }
  report("A4", "product-log residuals and elementary bounds",
         res_ok && holds_from <= 10.0,
         "worst_rel=" + fmt(worst) + " bounds_from=" + fmt(holds_from));
}

// ---------------------------------------------------------------- A5
void a5_additive_tail() {
  FieldConfig fc;
  fc.d = 1;
  fc.t = 1.0;
  fc.measure = LevyMeasure::pareto_tail(0.5);
  fc.window = box1(-6.0, 6.0);
  fc.seed = 1005;
  const auto samples = origin_samples(fc, 100000, 0);
  const double ahat = hill_estimator(samples, hill_default_k(samples.size()));
  const bool hill_ok = ahat >= 0.4 && ahat <= 0.6;
  const double R99 = quantile(samples, 0.99);
  const double phat = exceed_frac(samples, R99);
  const double W = integrate(
      [](double s) { return kernel_power_space_integral(0.5, s, 1); }, 1e-12,
      1.0, 1e-10);
  const bool tail_ok = phat >= 0.5 * fc.t * W * std::pow(R99, -0.5);
  report("A5", "additive field tail index and one-jump lower bound",
         hill_ok && tail_ok,
         "hill=" + fmt(ahat) + " R99=" + fmt(R99) + " bound_ratio=" +
             fmt(phat / (0.5 * fc.t * W * std::pow(R99, -0.5))));
}

// ---------------------------------------------------------------- A6
void a6_multiplicative_tail() {
  FieldConfig fc;
  fc.d = 1;
  fc.t = 1.0;
  fc.mode = Mode::multiplicative;
  fc.measure = LevyMeasure::pareto_tail(0.5);
  fc.window = box1(-6.0, 6.0);
  fc.seed = 1006;
  const auto samples = origin_samples(fc, 200000, 0);
  const double ahat = hill_estimator(samples, hill_default_k(samples.size()));
  // the slowly varying enhancement biases order-statistics estimators low at
  // any reachable threshold, so the index summary comes from the joint fit
  // log S = b0 - alpha log R + c (log R)^{1/(1+theta_alpha)}
  const double kappa = 1.0 / (1.0 + theta(0.5, 1));
  auto sorted = samples;
  std::sort(sorted.begin(), sorted.end());
  const double R_hi = sorted[sorted.size() - 60];
  const auto curve = survival_curve(samples, log_grid(10.0, R_hi, 25));
  bool index_ok = false, fit_ok = false;
  double a_joint = 0.0, c_joint = 0.0, slope = 0.0, tstat = 0.0;
  try {
    const auto jf = joint_tail_fit(curve, kappa);
    a_joint = jf.alpha;
    c_joint = jf.c;
    index_ok = a_joint >= 0.4 && a_joint <= 0.6;
    const auto fit = slow_variation_fit(curve, 0.5, SvForm::A, kappa);
    slope = fit.slope;
    tstat = fit.slope_stderr > 0 ? fit.slope / fit.slope_stderr : kInf;
    fit_ok = slope > 0.0 && tstat > 2.0 && c_joint > 0.0;
  } catch (const std::invalid_argument&) {
  }
  report("A6", "multiplicative field tail index and slow-variation fit",
         index_ok && fit_ok,
         "alpha_joint=" + fmt(a_joint) + " c_joint=" + fmt(c_joint) +
             " hill_raw=" + fmt(ahat) + " slope=" + fmt(slope) +
             " t=" + fmt(tstat));
}

// ---------------------------------------------------------------- A7
void a7_truncation_convergence() {
  FieldConfig fc;
  fc.d = 1;
  fc.t = 1.0;
  fc.mode = Mode::multiplicative;
  fc.measure = LevyMeasure::dirac_mixture({{0.5, 1.0}, {1.5, 0.5}});
  fc.window = box1(-1.0, 1.0);
  fc.small_jump_cutoff = 0.1;
  fc.seed = 1007;
  const std::uint64_t reps = 10000;
  auto mean_capped = [&](int cap, int m, double beta) {
    FieldConfig c = fc;
    c.chain_cap = cap;
    c.picard_levels = m;
    c.picard_cone = beta;
    const auto xs = origin_samples(c, reps, 0);
    double s = 0.0;
    for (double x : xs) s += std::min(x, 100.0);
    return s / static_cast<double>(reps);
  };
  const double m1 = mean_capped(8, 4, 4.0);
  const double m2 = mean_capped(16, 8, 8.0);
  const double m3 = mean_capped(32, 16, 16.0);
  const double rel1 = std::abs(m2 - m1) / std::abs(m1);
  const double rel2 = std::abs(m3 - m2) / std::abs(m2);
  const bool ok = rel2 < 0.01 && rel2 <= rel1 + 1e-12 && m2 >= m1 - 1e-12 &&
                  m3 >= m2 - 1e-12;
  report("A7", "truncation ladder converges with shrinking increments", ok,
         "means=" + fmt(m1) + "," + fmt(m2) + "," + fmt(m3) + " rel=" +
             fmt(rel1) + "->" + fmt(rel2));
}

// ---------------------------------------------------------------- A8
void a8_planted_dimension() {
  bool all_ok = true;
  std::string detail;
  Rng rng = Rng::for_replication(1008, 0);
  for (double lambda : {0.3, 0.6}) {
    const int n_max = 16;
    PeakSet set;
    set.d = 1;
    set.max_radius = std::exp(static_cast<double>(n_max));
    const auto R = static_cast<std::int64_t>(set.max_radius);
    for (std::int64_t x = 1; x <= R; ++x) {
      const double p = std::pow(static_cast<double>(x), -lambda);
      if (rng.uniform() < p) set.points.push_back({static_cast<double>(x)});
      if (rng.uniform() < p) set.points.push_back({static_cast<double>(-x)});
    }
    const auto counts = annulus_counts(set, 1, n_max);
    const auto mink = minkowski_dim(counts);
    std::vector<double> grid;
    for (double r = 0.05; r <= 1.5; r += 0.05) grid.push_back(r);
    const auto haus = hausdorff_dim_upper(counts, grid);
    const double target = 1.0 - lambda;
    const bool mink_ok = std::abs(mink.max_over_window - target) <= 0.15;
    const bool haus_ok = std::abs(haus.rho_star - target) <= 0.15 &&
                         haus.rho_star >= mink.max_over_window - 0.05;
    all_ok = all_ok && mink_ok && haus_ok;
    detail += " lambda=" + fmt(lambda) + ":mink=" + fmt(mink.max_over_window) +
              ",rho=" + fmt(haus.rho_star);
  }
  report("A8", "planted thinned lattice recovers its dimension", all_ok, detail);
}

// ---------------------------------------------------------------- A9
void a9_field_dimension() {
  bool all_ok = true;
  std::string detail;
  for (std::uint64_t seed : {11u, 22u, 33u}) {
    FieldConfig fc;
    fc.d = 1;
    fc.t = 1.0;
    fc.measure = LevyMeasure::pareto_tail(1.0);
    const double radius = std::ceil(std::exp(12.0));
    fc.window = box1(-radius, radius);
    fc.seed = seed;
    Rng rng(derive_stream_seed(seed, 0));
    const auto atoms = sample_atoms(fc, 1.0, kInf, rng);
    std::vector<std::vector<double>> pts;
    const auto R = static_cast<std::int64_t>(radius);
    pts.reserve(static_cast<std::size_t>(2 * R + 1));
    for (std::int64_t x = -R; x <= R; ++x) pts.push_back({static_cast<double>(x)});
    const auto field = evaluate_additive(atoms, fc, std::move(pts));
    PeakVariant v;
    v.tag = PeakVariant::Tag::gamma;
    v.d = 1;
    v.gamma = 0.5;
    const auto set = extract_peak_set(field, v);
    const auto counts = annulus_counts(set, 1, 12);
    const auto mink = minkowski_dim(counts);
    const bool ok = std::abs(mink.max_over_window - 0.5) <= 0.25;
    all_ok = all_ok && ok;
    detail += " seed" + std::to_string(seed) + ":" + fmt(mink.max_over_window);
  }
  report("A9", "peak-set dimension of the additive field", all_ok, detail);
}

// ---------------------------------------------------------------- A10
void a10_decompose() {
  bool ok = true;
  double worst = 0.0;
  const auto check_continuous = [&](const LevyMeasure& m, int K) {
    const auto dec = m.decompose(K);
    for (const auto& p : dec.pieces)
      if (p.total_mass() > 2.0 + 1e-12) ok = false;
    for (int i = 0; i < 100; ++i) {
      const double z = 0.05 * std::pow(400.0, i / 99.0);
      double s = 0.0;
      for (const auto& p : dec.pieces) s += p.tail(z);
      if (z < dec.remainder_cut) s += m.mass(z, dec.remainder_cut);
      const double err = std::abs(s - m.tail(z));
      worst = std::max(worst, err);
      if (err > 1e-9) ok = false;
    }
  };
  check_continuous(LevyMeasure::piecewise_density({{1.0, 1.0}, {10.0, 0.01}}), 5);
  check_continuous(LevyMeasure::piecewise_density(
                       {{0.5, 4.0}, {2.0, 0.2}, {20.0, 1e-4}}),
                   4);
  check_continuous(LevyMeasure::pareto_tail(0.7), 3);
  check_continuous(LevyMeasure::pareto_tail(2.0), 1);
  // atomic measures: bounded pieces, conserved mass
  for (int K : {1, 2, 3, 5}) {
    const auto m = LevyMeasure::dirac_mixture({{1.0, 5.0}, {2.5, 1.3}, {0.7, 0.4}});
    const auto dec = m.decompose(K);
    double tot = dec.remainder_mass;
    for (const auto& p : dec.pieces) {
      if (p.total_mass() > 2.0 + 1e-12) ok = false;
      tot += p.total_mass();
    }
    if (std::abs(tot - m.total_mass()) > 1e-9) ok = false;
  }
  report("A10", "bounded-mass decomposition conserves tails", ok,
         "worst_tail_err=" + fmt(worst));
}

// ---------------------------------------------------------------- A11
void a11_classification() {
  struct Row {
    double a, b, e;
    int d;
    bool div;
  };
  // expected verdicts derived by hand from the exponent comparison
  const std::vector<Row> table = {
      {0.0, -1.0, 2.0, 1, true},  {0.0, 0.0, 2.0, 1, true},
      {0.0, 1.0, 2.0, 1, true},   {0.25, 0.0, 2.0, 1, true},
      {0.5, -1.0, 2.0, 1, true},  {0.5, 0.0, 2.0, 1, true},
      {0.5, 0.5, 2.0, 1, true},   {0.5, 0.75, 2.0, 1, false},
      {0.5, 1.0, 2.0, 1, false},  {0.75, -3.0, 2.0, 1, false},
      {0.75, 0.0, 2.0, 1, false}, {0.75, 2.0, 2.0, 1, false},
      {1.0, 0.0, 2.0, 1, false},  {1.0, 0.0, 1.0, 2, true},
      {1.9, 0.0, 1.0, 2, true},   {2.0, 0.0, 1.0, 2, true},
      {2.0, 1.0, 1.0, 2, true},   {2.0, 1.1, 1.0, 2, false},
      {2.1, 0.0, 1.0, 2, false},  {3.0, -2.0, 1.0, 2, false},
      {0.5, 0.0, 1.0, 1, true},   {1.0, 1.0, 1.0, 1, true},
      {1.0, 2.0, 1.0, 1, false},  {1.5, 0.0, 1.0, 1, false},
      {0.5, 0.0, 2.0, 2, true},   {1.0, 0.5, 2.0, 2, true},
      {1.0, 0.6, 2.0, 2, false},  {1.5, 0.0, 2.0, 2, false},
      // a = 0.1 keeps the power drift dominant over the (log x)^{-8} factor
      // at the heights the numeric classifier probes
      {0.1, 4.0, 2.0, 1, true},   {2.0, -5.0, 2.0, 1, false},
  };
  bool exact_ok = true, numeric_ok = true;
  for (const auto& r : table) {
    const GrowthGauge g{r.a, r.b};
    const bool div = classify_integral(g, r.d, r.e) == IntegralVerdict::diverges;
    if (div != r.div) exact_ok = false;
    if (std::abs(r.e * r.a - r.d) >= 0.1) {
      const bool ndiv =
          classify_integral_numeric(g, r.d, r.e) == IntegralVerdict::diverges;
      if (ndiv != r.div) numeric_ok = false;
    }
  }
  report("A11", "divergence truth table, exact and numeric", exact_ok && numeric_ok,
         "gauges=" + std::to_string(table.size()));
}

// ---------------------------------------------------------------- A12
void a12_inequalities() {
  bool series_ok = true;
  std::vector<double> zs;
  for (double z = 0.01; z < 40.0; z *= 1.45) zs.push_back(z);
  const std::vector<double> Cs = {0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0};
  const std::vector<std::pair<double, double>> ag = {
      {1.0, 1.0}, {0.5, 1.0}, {2.0, 1.0}, {1.0, 2.0}, {0.5, 2.0},
      {2.0, 2.0}, {1.5, 1.0}, {1.0, 0.5}, {3.0, 1.0}, {1.5, 3.0}};
  for (auto [a, g] : ag)
    if (!gamma_series_bound_check(a, 1.0, g, zs, Cs).pass) series_ok = false;

  bool pz_ok = true;
  Rng rng = Rng::for_replication(1012, 0);
  for (int i = 0; i < 100; ++i) {
    DiscreteLaw law;
    const int k = 2 + static_cast<int>(rng.uniform(0.0, 5.0));
    double tot = 0.0;
    for (int j = 0; j < k; ++j) {
      law.values.push_back(rng.uniform(0.0, 15.0));
      law.probs.push_back(rng.uniform(0.05, 1.0));
      tot += law.probs.back();
    }
    for (auto& p : law.probs) p /= tot;
    if (!paley_zygmund_check(law, rng.uniform(0.1, 0.9), rng.uniform(0.1, 0.9),
                             1.0 + rng.uniform(0.2, 3.0))
             .pass)
      pz_ok = false;
  }

  DecouplingToy toy;
  Rng prng = Rng::for_replication(1013, 0);
  std::vector<double> pilot(30000);
  for (auto& x : pilot) x = decoupling_toy_draw(toy, false, prng);
  std::sort(pilot.begin(), pilot.end());
  std::vector<double> R_grid;
  for (double q : {0.5, 0.75, 0.9, 0.95, 0.99})
    R_grid.push_back(pilot[static_cast<std::size_t>(q * (pilot.size() - 1))]);
  bool dec_ok = true;
  for (double th : {0.1, 0.05})
    if (!decoupling_check(toy, th, R_grid, 100000, 1014).pass) dec_ok = false;

  report("A12", "series envelope, second-moment bounds, decoupled comparison",
         series_ok && pz_ok && dec_ok,
         std::string("series=") + (series_ok ? "ok" : "bad") + " pz=" +
             (pz_ok ? "ok" : "bad") + " dec=" + (dec_ok ? "ok" : "bad"));
}

// ---------------------------------------------------------------- A13
void a13_domain_contrast() {
  FieldConfig full;
  full.d = 1;
  full.t = 1.0;
  full.mode = Mode::multiplicative;
  full.measure = LevyMeasure::pareto_tail(1.0);
  full.window = box1(-2.0, 2.0);
  full.seed = 1015;
  const std::uint64_t reps = 2'000'000;
  const auto xs_full = origin_samples(full, reps, 0);
  FieldConfig half = full;
  half.window = box1(-1.0, 1.0);
  half.margin_tolerance = kInf;  // exact restriction: no exterior atoms
  const auto xs_half = origin_samples(half, reps, 0);
  const double R = quantile(xs_full, 0.999);
  const double pf = exceed_frac(xs_full, R);
  const double ph = exceed_frac(xs_half, R);
  const double se = std::sqrt(
      binomial_stderr(pf, reps) * binomial_stderr(pf, reps) +
      binomial_stderr(ph, reps) * binomial_stderr(ph, reps));
  const double z = se > 0 ? (pf - ph) / se : kInf;
  report("A13", "restricting the domain thins the extreme tail", z >= 3.0,
         "p_full=" + fmt(pf) + " p_half=" + fmt(ph) + " z=" + fmt(z));
}

}  // namespace

int main() {
  a1_iterated_integrals();
  a2_product_tail();
  a3_chain_law();
  a4_lambert();
  a5_additive_tail();
  a6_multiplicative_tail();
  a7_truncation_convergence();
  a8_planted_dimension();
  a9_field_dimension();
  a10_decompose();
  a11_classification();
  a12_inequalities();
  a13_domain_contrast();
  std::printf("%s (%d failure%s)\n", failures == 0 ? "ALL PASS" : "FAILURES",
              failures, failures == 1 ? "" : "s");
  return failures == 0 ? 0 : 1;
}
