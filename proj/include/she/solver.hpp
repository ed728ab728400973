#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "she/errors.hpp"
#include "she/kernel.hpp"
#include "she/levy.hpp"
#include "she/rng.hpp"

namespace she {

enum class Mode { additive, multiplicative };

struct Box {
  std::vector<double> lo, hi;

  double volume() const {
    double v = 1.0;
    for (std::size_t i = 0; i < lo.size(); ++i) v *= hi[i] - lo[i];
    return v;
  }

  bool contains(const std::vector<double>& p, double margin = 0.0) const {
    for (std::size_t i = 0; i < lo.size(); ++i)
      if (p[i] < lo[i] + margin || p[i] > hi[i] - margin) return false;
    return true;
  }

  Box padded(double r) const {
    Box b = *this;
    for (std::size_t i = 0; i < lo.size(); ++i) {
      b.lo[i] -= r;
      b.hi[i] += r;
    }
    return b;
  }
};

struct PoissonAtom {
  double tau = 0.0;
  std::vector<double> eta;
  double zeta = 0.0;
};

struct AtomSet {
  std::vector<PoissonAtom> atoms;  // sorted by tau, ties by eta lexicographic
  Box generation_window;           // padded box the atoms were drawn over
  double pad = 0.0;
  double mean_count_unpadded = 0.0;
  double z_lo = 0.0, z_hi = kInf;
};

struct TruncationDescriptor {
  int chain_cap = 0;        // 0 = unbounded chain depth
  int picard_levels = 0;    // m
  double picard_cone = 1.0; // beta
  double small_jump_cutoff = 1.0;  // epsilon
};

struct FieldConfig {
  int d = 1;
  double t = 1.0;
  LevyMeasure measure = LevyMeasure::pareto_tail(1.0);
  Mode mode = Mode::additive;
  Box window;
  double margin_tolerance = 1e-6;
  double small_jump_cutoff = 1.0;  // epsilon: jumps below it are dropped
  int picard_levels = 0;
  double picard_cone = 1.0;
  int chain_cap = 0;
  std::uint64_t seed = 0;
};

struct FieldSample {
  std::vector<std::vector<double>> points;
  std::vector<double> values;
  std::uint64_t seed = 0;
  std::size_t atom_count = 0;
  TruncationDescriptor trunc;
  Mode mode = Mode::additive;
  // expected dropped contribution rate: t * int_(0,eps) z dlambda
  double small_jump_bias = 0.0;
  // global factor exp(-t * int_(0,1) z dlambda) applied in multiplicative mode
  double m1_factor = 1.0;
};

namespace detail {

inline double dist2(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return s;
}

// g(dt, dx) with the cone indicator |dx| <= beta sqrt(dt); 0 for dt <= 0
inline double cone_kernel(int d, double dt, double dx2, double beta) {
  if (!(dt > 0.0)) return 0.0;
  if (dx2 > beta * beta * dt) return 0.0;
  return heat_kernel(d, dt, dx2);
}

inline double small_jump_first_moment(const LevyMeasure& m, double cut) {
  return cut > 0.0 ? m.moment(1.0, 0.0, cut, false) : 0.0;
}

}  // namespace detail

inline double window_padding(const FieldConfig& cfg, double interval_mass) {
  // solve exp(-r^2 / (2t)) * intensity = margin_tolerance by fixed point in
  // the padded volume; the kernel's Gaussian decay controls exterior atoms
  double r = 0.0;
  for (int it = 0; it < 3; ++it) {
    const double vol = cfg.window.padded(r).volume();
    const double intensity = cfg.t * vol * interval_mass;
    const double ratio = intensity / cfg.margin_tolerance;
    // tolerance at or above the intensity: every exterior atom is tolerable,
    // so the noise is restricted exactly to the window
    r = ratio <= 1.0 ? 0.0
                     : std::sqrt(2.0 * cfg.t * std::log(ratio)) + 1.0;
  }
  return r;
}

inline AtomSet sample_atoms(const FieldConfig& cfg, double z_lo, double z_hi,
                            Rng& rng) {
  const double m = cfg.measure.mass(z_lo, z_hi == kInf ? 1e300 : z_hi) +
                   (z_hi == kInf ? cfg.measure.tail(1e300) : 0.0);
  if (!std::isfinite(m))
    throw std::invalid_argument(
        "sample_atoms: infinite jump intensity on the interval; raise z_lo above " +
        std::to_string(cfg.measure.support_lo()));
  AtomSet set;
  set.z_lo = z_lo;
  set.z_hi = z_hi;
  set.mean_count_unpadded = cfg.t * cfg.window.volume() * m;
  set.pad = window_padding(cfg, m);
  set.generation_window = cfg.window.padded(set.pad);
  const double mean = cfg.t * set.generation_window.volume() * m;
  const auto n = rng.poisson(mean);
  set.atoms.reserve(n);
  for (std::uint64_t i = 0; i < n; ++i) {
    PoissonAtom a;
    a.tau = rng.uniform(0.0, cfg.t);
    a.eta.resize(static_cast<std::size_t>(cfg.d));
    for (int j = 0; j < cfg.d; ++j)
      a.eta[static_cast<std::size_t>(j)] =
          rng.uniform(set.generation_window.lo[static_cast<std::size_t>(j)],
                      set.generation_window.hi[static_cast<std::size_t>(j)]);
    a.zeta = cfg.measure.sample_size(z_lo, z_hi, rng);
    set.atoms.push_back(std::move(a));
  }
  std::sort(set.atoms.begin(), set.atoms.end(),
            [](const PoissonAtom& a, const PoissonAtom& b) {
              if (a.tau != b.tau) return a.tau < b.tau;
              return a.eta < b.eta;  // probability-zero tie, deterministic order
            });
  return set;
}

// Y_plus(t,x) = sum over atoms of g(t - tau, x - eta) * zeta; atoms below
// the small-jump cutoff are skipped and their expected contribution is
// recorded as the bias descriptor.
inline FieldSample evaluate_additive(const AtomSet& atoms, const FieldConfig& cfg,
                                     std::vector<std::vector<double>> points) {
  FieldSample out;
  out.seed = cfg.seed;
  out.mode = Mode::additive;
  out.atom_count = atoms.atoms.size();
  out.trunc = {cfg.chain_cap, cfg.picard_levels, cfg.picard_cone,
               cfg.small_jump_cutoff};
  out.small_jump_bias =
      cfg.t * detail::small_jump_first_moment(cfg.measure, cfg.small_jump_cutoff);
  out.values.assign(points.size(), 0.0);

  // contributions with |x - eta|^2 / (2t) beyond this underflow to zero
  const double r_cut = std::sqrt(2.0 * cfg.t * 785.0);
  const std::size_t K = atoms.atoms.size();
  const std::size_t P = points.size();
  const bool bucket = cfg.d <= 2 && K * P > 50'000'000ULL;

  if (!bucket) {
    for (std::size_t pi = 0; pi < P; ++pi) {
      double v = 0.0;
      for (const auto& a : atoms.atoms) {
        if (a.zeta < cfg.small_jump_cutoff) continue;
        v += heat_kernel(cfg.d, cfg.t - a.tau, detail::dist2(points[pi], a.eta)) *
             a.zeta;
      }
      out.values[pi] = v;
    }
  } else {
    // unit-cell spatial hash; cells are visited within r_cut of each point
    const int d = cfg.d;
    auto cell_key = [d](const std::vector<double>& p) {
      std::int64_t k = 0;
      for (int j = 0; j < d; ++j)
        k = k * 4'000'037 + static_cast<std::int64_t>(
                                std::floor(p[static_cast<std::size_t>(j)]));
      return k;
    };
    std::unordered_map<std::int64_t, std::vector<std::uint32_t>> grid;
    grid.reserve(K);
    for (std::size_t i = 0; i < K; ++i)
      grid[cell_key(atoms.atoms[i].eta)].push_back(static_cast<std::uint32_t>(i));
    const int reach = static_cast<int>(std::ceil(r_cut)) + 1;
    std::vector<double> probe(static_cast<std::size_t>(d));
    for (std::size_t pi = 0; pi < P; ++pi) {
      double v = 0.0;
      std::vector<int> off(static_cast<std::size_t>(d), -reach);
      for (;;) {
        for (int j = 0; j < d; ++j)
          probe[static_cast<std::size_t>(j)] =
              std::floor(points[pi][static_cast<std::size_t>(j)]) +
              off[static_cast<std::size_t>(j)];
        auto it = grid.find(cell_key(probe));
        if (it != grid.end()) {
          for (auto idx : it->second) {
            const auto& a = atoms.atoms[idx];
            if (a.zeta < cfg.small_jump_cutoff) continue;
            v += heat_kernel(d, cfg.t - a.tau, detail::dist2(points[pi], a.eta)) *
                 a.zeta;
          }
        }
        int j = 0;
        for (; j < d; ++j) {
          if (++off[static_cast<std::size_t>(j)] <= reach) break;
          off[static_cast<std::size_t>(j)] = -reach;
        }
        if (j == d) break;
      }
      out.values[pi] = v;
    }
  }
  out.points = std::move(points);
  return out;
}

namespace detail {

// Small-jump Picard machinery. For a fixed target (tau_T, eta_T) it returns
//   F[j] = sum over beta-coned chains s_j -> ... -> target through small
//          atoms after s_j, with at most m atoms per chain (zeta factors of
//          all atoms except s_j included),
// so that Y_< (target) = 1 + sum_j zeta_j F[j] and a source S couples in as
// g(S -> target) + sum_j coneg(S -> s_j) zeta_j F[j].
struct SmallProp {
  std::vector<double> F;
  double Y_small = 1.0;
};

inline SmallProp small_propagation(int d, double beta, int m,
                                   const std::vector<PoissonAtom>& small,
                                   double tau_T, const std::vector<double>& eta_T) {
  SmallProp sp;
  const std::size_t Ks = small.size();
  sp.F.assign(Ks, 0.0);
  if (m <= 0 || Ks == 0) return sp;
  // E[j] at chain length c; atoms are time-sorted so only j' > j couple
  std::vector<double> E(Ks), En(Ks);
  for (std::size_t j = 0; j < Ks; ++j) {
    E[j] = small[j].tau < tau_T
               ? cone_kernel(d, tau_T - small[j].tau,
                             dist2(eta_T, small[j].eta), beta)
               : 0.0;
    sp.F[j] = E[j];
  }
  for (int c = 2; c <= m; ++c) {
    for (std::size_t j = 0; j < Ks; ++j) {
      double s = 0.0;
      for (std::size_t j2 = j + 1; j2 < Ks; ++j2) {
        if (E[j2] == 0.0) continue;
        s += cone_kernel(d, small[j2].tau - small[j].tau,
                         dist2(small[j2].eta, small[j].eta), beta) *
             small[j2].zeta * E[j2];
      }
      En[j] = s;
      sp.F[j] += s;
    }
    std::swap(E, En);
  }
  for (std::size_t j = 0; j < Ks; ++j) sp.Y_small += small[j].zeta * sp.F[j];
  return sp;
}

// propagator from source S to the target that produced sp
inline double small_u(int d, double beta, const std::vector<PoissonAtom>& small,
                      const SmallProp& sp, double tau_S,
                      const std::vector<double>& eta_S, double tau_T,
                      const std::vector<double>& eta_T) {
  double u = heat_kernel(d, tau_T - tau_S, dist2(eta_T, eta_S));
  for (std::size_t j = 0; j < small.size(); ++j) {
    if (sp.F[j] == 0.0 || small[j].tau <= tau_S) continue;
    u += cone_kernel(d, small[j].tau - tau_S, dist2(small[j].eta, eta_S), beta) *
         small[j].zeta * sp.F[j];
  }
  return u;
}

}  // namespace detail

// Chain dynamic program over time-ordered atoms. Large jumps (zeta >= 1)
// drive the exact recursion S_a = zeta_a (Y_<(a) + sum_{b earlier} u(b->a) S_b);
// small jumps in [epsilon, 1) enter through the level-m Picard propagator
// with cone beta. chain_cap > 0 limits large-chain depth and adds the unit
// cone on large links. With no small-jump mass the evaluation of the chaos
// series over windowed atoms is exact.
inline FieldSample evaluate_multiplicative_dp(const AtomSet& atoms,
                                              const FieldConfig& cfg,
                                              std::vector<std::vector<double>> points) {
  const double m1 = cfg.measure.moment(1.0, 0.0, 1.0, false);
  if (!std::isfinite(m1))
    throw unsupported_error(
        "evaluate_multiplicative_dp: infinite small-jump first moment; "
        "this configuration is unsupported");
  FieldSample out;
  out.seed = cfg.seed;
  out.mode = Mode::multiplicative;
  out.atom_count = atoms.atoms.size();
  out.trunc = {cfg.chain_cap, cfg.picard_levels, cfg.picard_cone,
               cfg.small_jump_cutoff};
  out.small_jump_bias =
      cfg.t * detail::small_jump_first_moment(cfg.measure, cfg.small_jump_cutoff);
  out.m1_factor = std::exp(-m1 * cfg.t);

  std::vector<PoissonAtom> large, small;
  for (const auto& a : atoms.atoms) {
    if (a.zeta < cfg.small_jump_cutoff) continue;
    (a.zeta >= 1.0 ? large : small).push_back(a);
  }
  const std::size_t KL = large.size();
  const int d = cfg.d;
  const int m = cfg.picard_levels;
  const double beta = cfg.picard_cone;
  const int cap = cfg.chain_cap;
  const double large_beta = cap > 0 ? 1.0 : kInf;  // unit cone per truncation

  // S[a] resolved by chain depth when capped, total otherwise
  const int depths = cap > 0 ? cap : 1;
  std::vector<std::vector<double>> S(KL, std::vector<double>(
                                             static_cast<std::size_t>(depths), 0.0));
  std::vector<double> S_total(KL, 0.0);
  for (std::size_t a = 0; a < KL; ++a) {
    const auto sp = detail::small_propagation(d, beta, m, small, large[a].tau,
                                              large[a].eta);
    if (cap == 0) {
      double acc = sp.Y_small;
      for (std::size_t b = 0; b < a; ++b) {
        if (large[b].tau >= large[a].tau) continue;
        acc += detail::small_u(d, beta, small, sp, large[b].tau, large[b].eta,
                               large[a].tau, large[a].eta) *
               S_total[b];
      }
      S_total[a] = large[a].zeta * acc;
    } else {
      S[a][0] = large[a].zeta * sp.Y_small;
      for (int k = 1; k < cap; ++k) {
        double acc = 0.0;
        for (std::size_t b = 0; b < a; ++b) {
          if (large[b].tau >= large[a].tau || S[b][static_cast<std::size_t>(k - 1)] == 0.0)
            continue;
          const double dt = large[a].tau - large[b].tau;
          const double dx2 = detail::dist2(large[a].eta, large[b].eta);
          if (dx2 > large_beta * large_beta * dt) continue;
          acc += detail::small_u(d, beta, small, sp, large[b].tau, large[b].eta,
                                 large[a].tau, large[a].eta) *
                 S[b][static_cast<std::size_t>(k - 1)];
        }
        S[a][static_cast<std::size_t>(k)] = large[a].zeta * acc;
      }
      for (int k = 0; k < cap; ++k) S_total[a] += S[a][static_cast<std::size_t>(k)];
    }
  }

  out.values.reserve(points.size());
  for (const auto& x : points) {
    const auto sp = detail::small_propagation(d, beta, m, small, cfg.t, x);
    double v = sp.Y_small;
    for (std::size_t a = 0; a < KL; ++a) {
      if (cap > 0) {
        const double dt = cfg.t - large[a].tau;
        const double dx2 = detail::dist2(x, large[a].eta);
        if (dx2 > large_beta * large_beta * dt) continue;
      }
      v += detail::small_u(d, beta, small, sp, large[a].tau, large[a].eta, cfg.t,
                           x) *
           S_total[a];
    }
    out.values.push_back(v * out.m1_factor);
  }
  out.points = std::move(points);
  return out;
}

inline FieldSample evaluate(const AtomSet& atoms, const FieldConfig& cfg,
                            std::vector<std::vector<double>> points) {
  return cfg.mode == Mode::additive
             ? evaluate_additive(atoms, cfg, std::move(points))
             : evaluate_multiplicative_dp(atoms, cfg, std::move(points));
}

struct SupEstimate {
  double sup = 0.0;
  std::vector<double> argmax;
};

// Max over a regular subgrid of the cube; a lower bound of the true sup,
// nondecreasing under resolution doubling.
inline SupEstimate field_sup(const AtomSet& atoms, const FieldConfig& cfg,
                             const Box& cube, int resolution) {
  if (resolution < 2) throw std::invalid_argument("field_sup: resolution >= 2");
  const int d = cfg.d;
  std::vector<std::vector<double>> pts;
  std::vector<int> idx(static_cast<std::size_t>(d), 0);
  for (;;) {
    std::vector<double> p(static_cast<std::size_t>(d));
    for (int j = 0; j < d; ++j)
      p[static_cast<std::size_t>(j)] =
          cube.lo[static_cast<std::size_t>(j)] +
          (cube.hi[static_cast<std::size_t>(j)] - cube.lo[static_cast<std::size_t>(j)]) *
              idx[static_cast<std::size_t>(j)] / (resolution - 1.0);
    pts.push_back(std::move(p));
    int j = 0;
    for (; j < d; ++j) {
      if (++idx[static_cast<std::size_t>(j)] < resolution) break;
      idx[static_cast<std::size_t>(j)] = 0;
    }
    if (j == d) break;
  }
  const auto sample = evaluate(atoms, cfg, std::move(pts));
  SupEstimate est;
  est.sup = -kInf;
  for (std::size_t i = 0; i < sample.values.size(); ++i) {
    if (sample.values[i] > est.sup) {
      est.sup = sample.values[i];
      est.argmax = sample.points[i];
    }
  }
  return est;
}

inline SupEstimate field_sup(const FieldConfig& cfg, const Box& cube,
                             int resolution, Rng& rng) {
  const auto atoms = sample_atoms(cfg, cfg.small_jump_cutoff, kInf, rng);
  return field_sup(atoms, cfg, cube, resolution);
}

// Structural truncation decay rate e^{-beta} + m^{-theta_p m / (3p)} with
// unit constants; usable only to schedule (m, beta), not as an error bound.
inline double truncation_decay(double p, int m, double beta, int d) {
  const double th = theta(p, d);
  if (!(th > 0.0))
    throw std::invalid_argument("truncation_decay: requires theta_p > 0");
  const double picard_term =
      m <= 0 ? 1.0 : std::pow(m, -th * m / (3.0 * p));
  return std::exp(-beta) + picard_term;
}

}  // namespace she
