#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "she/analysis.hpp"
#include "she/chains.hpp"
#include "she/config.hpp"
#include "she/dimension.hpp"
#include "she/io.hpp"
#include "she/lemmas.hpp"
#include "she/solver.hpp"

namespace she {

// Index-addressed parallel loop. Each index derives its own rng stream from
// (seed, index) inside fn and writes to its own slot, so results are
// bitwise independent of the thread budget.
template <typename Fn>
void parallel_for(std::uint64_t n, int threads, Fn&& fn) {
  if (threads <= 0) {
    threads = static_cast<int>(std::thread::hardware_concurrency());
    if (threads <= 0) threads = 1;
  }
  if (threads == 1 || n < 2) {
    for (std::uint64_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::uint64_t> next{0};
  auto worker = [&] {
    const std::uint64_t chunk = std::max<std::uint64_t>(1, n / (8u * threads));
    for (;;) {
      const std::uint64_t lo = next.fetch_add(chunk);
      if (lo >= n) return;
      const std::uint64_t hi = std::min(n, lo + chunk);
      for (std::uint64_t i = lo; i < hi; ++i) fn(i);
    }
  };
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
}

// One replication of the field value at the origin.
inline double origin_value(const FieldConfig& fc, std::uint64_t index) {
  Rng rng = Rng::for_replication(fc.seed, index);
  const auto atoms = sample_atoms(fc, fc.small_jump_cutoff, kInf, rng);
  const std::vector<std::vector<double>> pts = {
      std::vector<double>(static_cast<std::size_t>(fc.d), 0.0)};
  return evaluate(atoms, fc, pts).values[0];
}

inline std::vector<double> origin_samples(const FieldConfig& fc,
                                          std::uint64_t replications, int threads) {
  std::vector<double> out(replications);
  // surface unsupported-regime errors from worker threads
  std::atomic<bool> unsupported{false};
  std::string message;
  std::mutex m;
  parallel_for(replications, threads, [&](std::uint64_t i) {
    if (unsupported.load()) return;
    try {
      out[i] = origin_value(fc, i);
    } catch (const unsupported_error& e) {
      std::lock_guard<std::mutex> lock(m);
      unsupported = true;
      message = e.what();
    }
  });
  if (unsupported) throw unsupported_error(message);
  return out;
}

inline std::vector<double> log_grid(double lo, double hi, int n) {
  std::vector<double> g;
  for (int i = 0; i < n; ++i)
    g.push_back(lo * std::pow(hi / lo, n == 1 ? 0.0 : i / (n - 1.0)));
  return g;
}

struct RunResult {
  int exit_code = 0;
  std::string message;
};

namespace detail {

inline void persist(Manifest& man, const std::filesystem::path& dir,
                    const std::string& name, const std::string& data) {
  write_file(dir / name, data);
  man.add_artifact(dir / name, data);
}

inline json sv_fit_json(const SvFit& f) {
  return {{"form", f.form == SvForm::A ? "A" : "B"},
          {"slope", f.slope},
          {"intercept", f.intercept},
          {"r2", f.r2},
          {"slope_stderr", f.slope_stderr},
          {"n_points", f.n_points},
          {"R_min", f.R_min},
          {"R_max", f.R_max}};
}

inline json lemma_json(const LemmaCheckResult& r) {
  return {{"id", r.id},     {"inputs", r.inputs}, {"lhs", r.lhs},
          {"rhs", r.rhs},   {"margin", r.margin}, {"pass", r.pass}};
}

}  // namespace detail

inline RunResult run_experiment(const ExperimentConfig& cfg,
                                const std::string& config_text) {
  const std::filesystem::path dir = cfg.out_dir;
  Manifest man(cfg.kind, cfg.seed, config_text);
  RunResult res;

  if (cfg.kind == "simulate") {
    const auto fc = cfg.field_config();
    Rng rng(derive_stream_seed(cfg.seed, 0));
    const auto atoms = sample_atoms(fc, fc.small_jump_cutoff, kInf, rng);
    std::vector<std::vector<double>> pts;
    if (cfg.d == 1) {
      for (int i = 0; i <= 200; ++i)
        pts.push_back({cfg.window_lo + (cfg.window_hi - cfg.window_lo) * i / 200.0});
    } else {
      const int res_axis = 41;
      std::vector<int> idx(static_cast<std::size_t>(cfg.d), 0);
      for (;;) {
        std::vector<double> p;
        for (int j = 0; j < cfg.d; ++j)
          p.push_back(cfg.window_lo + (cfg.window_hi - cfg.window_lo) *
                                          idx[static_cast<std::size_t>(j)] /
                                          (res_axis - 1.0));
        pts.push_back(std::move(p));
        int j = 0;
        for (; j < cfg.d; ++j) {
          if (++idx[static_cast<std::size_t>(j)] < res_axis) break;
          idx[static_cast<std::size_t>(j)] = 0;
        }
        if (j == cfg.d) break;
      }
    }
    const auto field = evaluate(atoms, fc, std::move(pts));
    std::vector<std::string> cols;
    for (int j = 0; j < cfg.d; ++j) cols.push_back("x" + std::to_string(j));
    cols.push_back("value");
    CsvWriter csv(cols);
    for (std::size_t i = 0; i < field.points.size(); ++i) {
      auto row = field.points[i];
      row.push_back(field.values[i]);
      csv.row(row);
    }
    detail::persist(man, dir, "field.csv", csv.str());
    json meta = {{"seed", field.seed},
                 {"atom_count", field.atom_count},
                 {"mode", cfg.mode},
                 {"chain_cap", field.trunc.chain_cap},
                 {"picard_levels", field.trunc.picard_levels},
                 {"picard_cone", field.trunc.picard_cone},
                 {"small_jump_cutoff", field.trunc.small_jump_cutoff},
                 {"small_jump_bias", field.small_jump_bias},
                 {"m1_factor", field.m1_factor}};
    detail::persist(man, dir, "meta.json", meta.dump(2) + "\n");
  } else if (cfg.kind == "tail") {
    const auto fc = cfg.field_config();
    const auto samples = origin_samples(fc, cfg.replications, cfg.threads);
    const auto R_grid = log_grid(cfg.R_min, cfg.R_max, cfg.R_points);
    const std::size_t n = samples.size();
    const std::vector<std::size_t> k_grid = {
        static_cast<std::size_t>(std::pow(n, 0.5)),
        static_cast<std::size_t>(std::pow(n, 0.6)),
        static_cast<std::size_t>(std::pow(n, 0.7))};
    const auto rep = tail_report(samples, R_grid, k_grid);
    CsvWriter surv({"R", "survival", "stderr", "exceedances"});
    for (const auto& p : rep.survival)
      surv.row({p.R, p.S, p.stderr_, static_cast<double>(p.exceedances)});
    detail::persist(man, dir, "survival.csv", surv.str());
    CsvWriter hill({"k", "alpha_hat"});
    for (const auto& [k, a] : rep.hill) hill.row({static_cast<double>(k), a});
    detail::persist(man, dir, "hill.csv", hill.str());
    json report = {{"sample_size", rep.sample_size},
                   {"default_k", rep.default_k},
                   {"alpha_at_default_k", rep.alpha_at_default_k},
                   {"default_k_is_convention", true}};
    try {
      const double kappa = 1.0 / (1.0 + theta(cfg.alpha, cfg.d));
      const auto fit = slow_variation_fit(
          rep.survival, cfg.alpha, cfg.fit_form == "B" ? SvForm::B : SvForm::A,
          kappa);
      report["sv_fit"] = detail::sv_fit_json(fit);
    } catch (const std::invalid_argument& e) {
      report["sv_fit_error"] = e.what();
    }
    detail::persist(man, dir, "report.json", report.dump(2) + "\n");
  } else if (cfg.kind == "dimension") {
    const auto fc = cfg.field_config();
    Rng rng(derive_stream_seed(cfg.seed, 0));
    FieldConfig wide = fc;
    // round the lattice radius up so shell n_max is fully covered
    const double radius = std::ceil(std::exp(static_cast<double>(cfg.n_max)));
    wide.window.lo.assign(static_cast<std::size_t>(cfg.d), -radius);
    wide.window.hi.assign(static_cast<std::size_t>(cfg.d), radius);
    const auto atoms = sample_atoms(wide, wide.small_jump_cutoff, kInf, rng);
    std::vector<std::vector<double>> pts;
    if (cfg.d != 1)
      throw unsupported_error("dimension preset: lattice evaluation only for d=1");
    const auto R = static_cast<std::int64_t>(radius);
    for (std::int64_t x = -R; x <= R; ++x)
      pts.push_back({static_cast<double>(x)});
    const auto field = evaluate(atoms, wide, std::move(pts));
    PeakVariant v;
    v.tag = PeakVariant::Tag::gamma;
    v.d = cfg.d;
    v.gamma = cfg.gamma;
    const auto set = extract_peak_set(field, v);
    const auto counts = annulus_counts(set, 1, cfg.n_max);
    const auto mink = minkowski_dim(counts);
    std::vector<double> rho_grid;
    for (double r = 0.05; r <= cfg.d + 0.5; r += 0.05) rho_grid.push_back(r);
    const auto haus = hausdorff_dim_upper(counts, rho_grid);
    CsvWriter ccsv({"n", "C_n", "a_n"});
    for (std::size_t i = 0; i < counts.size(); ++i)
      ccsv.row({static_cast<double>(counts[i].n),
                static_cast<double>(counts[i].C), mink.a_n[i]});
    detail::persist(man, dir, "counts.csv", ccsv.str());
    json report = {{"threshold", set.threshold_desc},
                   {"points_in_set", set.points.size()},
                   {"bounded", mink.bounded},
                   {"minkowski_max", mink.max_over_window},
                   {"minkowski_ols", mink.ols_slope},
                   {"hausdorff_rho_star", haus.rho_star}};
    detail::persist(man, dir, "dimension.json", report.dump(2) + "\n");
  } else if (cfg.kind == "chains") {
    const auto scan =
        lower_bound_scan(cfg.t, cfg.d, cfg.measure(), cfg.scan_R, cfg.scan_N_lo,
                         cfg.scan_N_hi, cfg.replications, cfg.seed);
    CsvWriter csv({"N", "p_AN_closed", "p_AN_mc", "cond_estimate", "summand"});
    for (const auto& r : scan.rows)
      csv.row({static_cast<double>(r.N), r.p_AN_closed, r.p_AN_mc, r.cond_estimate,
               r.summand});
    detail::persist(man, dir, "scan.csv", csv.str());
    json report = {{"optimal_N", scan.optimal_N}, {"lower_bound_total", scan.total}};
    detail::persist(man, dir, "scan.json", report.dump(2) + "\n");
  } else if (cfg.kind == "verify") {
    std::vector<LemmaCheckResult> checks;
    checks.push_back(lambert_w_bounds_check(log_grid(3.0, 1e8, 200)));
    {
      // closed form vs quadrature on a small grid
      LemmaCheckResult r;
      r.id = "iter_int";
      r.margin = kInf;
      r.pass = true;
      for (double a : {0.0, 0.5})
        for (double b : {0.0, 1.0})
          for (double R : {2.0, 10.0})
            for (int N : {1, 2}) {
              const double closed = iter_int_closed(N, a, b, R).value;
              const auto orc = iter_int_quadrature(N, a, b, R);
              const double rel = std::abs(closed - orc.value) / closed;
              if (1e-6 - rel < r.margin) {
                r.margin = 1e-6 - rel;
                r.lhs = closed;
                r.rhs = orc.value;
              }
              if (rel > 1e-6) r.pass = false;
            }
      r.inputs = "N in {1,2}, alpha in {0,0.5}, beta in {0,1}, R in {2,10}";
      checks.push_back(r);
    }
    for (auto [a, g] : std::vector<std::pair<double, double>>{
             {1.0, 1.0}, {0.5, 1.0}, {2.0, 1.0}, {1.0, 2.0}, {0.5, 2.0}}) {
      checks.push_back(gamma_series_bound_check(
          a, 1.0, g, log_grid(0.01, 30.0, 40),
          {0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0}));
    }
    {
      Rng rng(derive_stream_seed(cfg.seed, 99));
      bool all = true;
      LemmaCheckResult worst;
      worst.margin = kInf;
      for (int i = 0; i < 100; ++i) {
        DiscreteLaw law;
        const int k = 2 + static_cast<int>(rng.uniform(0.0, 5.0));
        double total = 0.0;
        for (int j = 0; j < k; ++j) {
          law.values.push_back(rng.uniform(0.1, 20.0));
          const double w = rng.uniform(0.05, 1.0);
          law.probs.push_back(w);
          total += w;
        }
        for (auto& p : law.probs) p /= total;
        const auto r = paley_zygmund_check(law, rng.uniform(0.1, 0.9),
                                           rng.uniform(0.1, 0.9),
                                           1.0 + rng.uniform(0.2, 3.0));
        if (r.margin < worst.margin) worst = r;
        all = all && r.pass;
      }
      worst.inputs = "100 random discrete laws; worst margin shown";
      worst.pass = all;
      checks.push_back(worst);
    }
    {
      DecouplingToy toy;
      const std::uint64_t reps = std::min<std::uint64_t>(cfg.replications, 100000);
      std::vector<double> draws(reps);
      parallel_for(reps, cfg.threads, [&](std::uint64_t i) {
        Rng rng = Rng::for_replication(cfg.seed + 7, i);
        draws[i] = decoupling_toy_draw(toy, false, rng);
      });
      std::sort(draws.begin(), draws.end());
      std::vector<double> R_grid;
      for (double q : {0.5, 0.75, 0.9, 0.95, 0.99})
        R_grid.push_back(draws[static_cast<std::size_t>(q * (reps - 1))]);
      checks.push_back(decoupling_check(toy, 0.1, R_grid, reps, cfg.seed + 8));
      checks.push_back(decoupling_check(toy, 0.05, R_grid, reps, cfg.seed + 9));
    }
    json report = json::array();
    bool all_pass = true;
    for (const auto& c : checks) {
      report.push_back(detail::lemma_json(c));
      all_pass = all_pass && c.pass;
    }
    json wrap = {{"all_pass", all_pass}, {"checks", report}};
    detail::persist(man, dir, "verify.json", wrap.dump(2) + "\n");
    if (!all_pass) {
      res.exit_code = 3;
      res.message = "one or more lemma checks failed";
    }
  } else if (cfg.kind == "classify") {
    CsvWriter csv({"a", "b", "exponent", "exact_diverges", "numeric_diverges"});
    const double e2 = 2.0 / cfg.d;
    for (double a : {0.0, 0.2, 0.35, 0.55, 0.7, 1.0})
      for (double b : {-2.0, -0.5, 0.0, 0.5, 2.0}) {
        GrowthGauge g{a, b};
        const bool ex = classify_integral(g, cfg.d, e2) == IntegralVerdict::diverges;
        const bool nu =
            classify_integral_numeric(g, cfg.d, e2) == IntegralVerdict::diverges;
        csv.row({a, b, e2, ex ? 1.0 : 0.0, nu ? 1.0 : 0.0});
      }
    detail::persist(man, dir, "classify.csv", csv.str());
  } else if (cfg.kind == "bounded-domain-compare") {
    auto fc = cfg.field_config();
    fc.mode = Mode::multiplicative;
    const auto full = origin_samples(fc, cfg.replications, cfg.threads);
    FieldConfig halved = fc;
    for (std::size_t j = 0; j < halved.window.lo.size(); ++j) {
      halved.window.lo[j] *= 0.5;
      halved.window.hi[j] *= 0.5;
    }
    halved.margin_tolerance = 1.0;  // deliberate domain restriction, no padding
    const auto part = origin_samples(halved, cfg.replications, cfg.threads);
    auto sorted = full;
    std::sort(sorted.begin(), sorted.end());
    const double R = sorted[static_cast<std::size_t>(0.999 * (sorted.size() - 1))];
    auto freq = [&](const std::vector<double>& v) {
      std::uint64_t c = 0;
      for (double x : v)
        if (x > R) ++c;
      return static_cast<double>(c) / static_cast<double>(v.size());
    };
    const double pf = freq(full), ph = freq(part);
    const double se = std::sqrt(binomial_stderr(pf, full.size()) *
                                    binomial_stderr(pf, full.size()) +
                                binomial_stderr(ph, part.size()) *
                                    binomial_stderr(ph, part.size()));
    json report = {{"R", R},
                   {"full_window_exceedance", pf},
                   {"halved_window_exceedance", ph},
                   {"stderr", se},
                   {"z", se > 0 ? (pf - ph) / se : kInf}};
    detail::persist(man, dir, "compare.json", report.dump(2) + "\n");
  }

  write_file(dir / "manifest.json", man.str());
  return res;
}

}  // namespace she
