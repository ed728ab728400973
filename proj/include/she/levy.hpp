#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "she/rng.hpp"
#include "she/special.hpp"

namespace she {

// Truncated moments of a Levy measure:
//   mu_p        : int_(0,inf) z^p
//   m_p         : int_(0,1)   z^p
//   M_p         : int_[1,inf) z^p
//   m_log_p     : int_(0,1)   z^p |log z|
//   m_plog_p    : int_(0,1)   z^p |log z|^{1{p=1}}
enum class MomentKind { mu_p, m_p, M_p, m_log_p, m_plog_p };

enum class ConditionId { heavy_tail, light_tail, sup };

struct MomentDiag {
  std::string name;
  double value = 0.0;  // +inf encodes a divergent integral
};

struct ConditionVerdict {
  std::string condition;
  bool holds = false;
  std::vector<MomentDiag> diagnostics;
};

struct DiracAtom {
  double z = 0.0;
  double w = 0.0;
};

struct DensityKnot {
  double z = 0.0;
  double f = 0.0;  // density value at z
};

// A spectrally positive Levy measure on (0, inf).
class LevyMeasure {
 public:
  enum class Kind { pareto_tail, dirac_mixture, piecewise_density, restricted };

  // tail z^{-alpha} on (1, inf), no mass on (0, 1]
  static LevyMeasure pareto_tail(double alpha) {
    if (!(alpha > 0)) throw std::invalid_argument("pareto_tail: alpha > 0 required");
    LevyMeasure m;
    m.kind_ = Kind::pareto_tail;
    m.alpha_ = alpha;
    return m;
  }

  static LevyMeasure dirac_mixture(std::vector<DiracAtom> atoms) {
    for (const auto& a : atoms)
      if (!(a.z > 0) || !(a.w > 0))
        throw std::invalid_argument("dirac_mixture: atoms need z > 0, w > 0");
    std::sort(atoms.begin(), atoms.end(),
              [](const DiracAtom& a, const DiracAtom& b) { return a.z > b.z; });
    LevyMeasure m;
    m.kind_ = Kind::dirac_mixture;
    m.atoms_ = std::move(atoms);
    return m;
  }

  // log-linear density between knots, power-law extrapolated beyond the
  // end knots; slopes are restricted so that int (1 ^ z^2) dlambda < inf
  static LevyMeasure piecewise_density(std::vector<DensityKnot> knots) {
    if (knots.size() < 2)
      throw std::invalid_argument("piecewise_density: need >= 2 knots");
    for (std::size_t i = 0; i < knots.size(); ++i) {
      if (!(knots[i].z > 0) || !(knots[i].f > 0))
        throw std::invalid_argument("piecewise_density: knots need z > 0, f > 0");
      if (i > 0 && !(knots[i].z > knots[i - 1].z))
        throw std::invalid_argument("piecewise_density: knots must be z-increasing");
    }
    LevyMeasure m;
    m.kind_ = Kind::piecewise_density;
    m.knots_ = std::move(knots);
    const double s0 = m.segment_slope(0);
    const double sl = m.segment_slope(m.knots_.size() - 2);
    if (!(s0 > -3.0))
      throw std::invalid_argument("piecewise_density: z^2 mass diverges at 0");
    if (!(sl < -1.0))
      throw std::invalid_argument("piecewise_density: tail mass diverges at inf");
    return m;
  }

  // restriction of base to the interval (z_lo, z_hi]
  static LevyMeasure restricted(LevyMeasure base, double z_lo, double z_hi) {
    if (!(z_lo >= 0) || !(z_hi > z_lo))
      throw std::invalid_argument("restricted: need 0 <= z_lo < z_hi");
    LevyMeasure m;
    m.kind_ = Kind::restricted;
    m.base_ = std::make_shared<LevyMeasure>(std::move(base));
    m.lo_ = z_lo;
    m.hi_ = z_hi;
    return m;
  }

  Kind kind() const { return kind_; }
  double pareto_alpha() const { return alpha_; }
  const std::vector<DiracAtom>& atoms() const { return atoms_; }

  // lambda((z, inf))
  double tail(double z) const {
    if (!(z > 0)) throw std::invalid_argument("tail: z > 0 required");
    switch (kind_) {
      case Kind::pareto_tail:
        return z <= 1.0 ? 1.0 : std::pow(z, -alpha_);
      case Kind::dirac_mixture: {
        double s = 0.0;
        for (const auto& a : atoms_)
          if (a.z > z) s += a.w;
        return s;
      }
      case Kind::piecewise_density:
        return pw_tail(z);
      case Kind::restricted: {
        const double a = std::max(z, lo_);
        if (a >= hi_) return 0.0;
        return base_->tail(a) - base_->tail(hi_);
      }
    }
    return 0.0;
  }

  // lambda((a, b])
  double mass(double a, double b) const {
    if (b <= a) return 0.0;
    return tail(a) - tail(b);
  }

  double total_mass() const {
    switch (kind_) {
      case Kind::pareto_tail:
        return 1.0;
      case Kind::dirac_mixture: {
        double s = 0.0;
        for (const auto& a : atoms_) s += a.w;
        return s;
      }
      case Kind::piecewise_density: {
        const double s0 = segment_slope(0);
        if (s0 <= -1.0) return kInf;
        return pw_tail(0.5 * knots_.front().z) +
               mass(0.5 * knots_.front().z, knots_.front().z) + tail(knots_.front().z);
      }
      case Kind::restricted:
        return base_->mass(lo_, hi_);
    }
    return 0.0;
  }

  // smallest z below which the support is empty (0 for unbounded-below kinds)
  double support_lo() const {
    switch (kind_) {
      case Kind::pareto_tail: return 1.0;
      case Kind::dirac_mixture: return atoms_.empty() ? 0.0 : atoms_.back().z;
      case Kind::piecewise_density: return 0.0;
      case Kind::restricted: return std::max(lo_, base_->support_lo());
    }
    return 0.0;
  }

  // generalized inverse z_level = sup{z > 0 : tail(z) > level}; returns the
  // support edge when the level is never exceeded from above
  double tail_inverse(double level) const {
    if (level < 0) throw std::invalid_argument("tail_inverse: level >= 0");
    switch (kind_) {
      case Kind::pareto_tail:
        if (level >= 1.0) return 1.0;
        if (level <= 0.0) return kInf;
        return std::pow(level, -1.0 / alpha_);
      case Kind::dirac_mixture: {
        double cum = 0.0;
        for (const auto& a : atoms_) {
          cum += a.w;
          if (cum > level) return a.z;
        }
        return support_lo();
      }
      case Kind::piecewise_density:
        return pw_tail_inverse(level);
      case Kind::restricted: {
        const double shifted = level + base_->tail(hi_);
        const double z = base_->tail_inverse(shifted);
        return std::clamp(z, lo_, hi_);
      }
    }
    return 0.0;
  }

  // Named truncated moment; +inf when the integral diverges.
  double truncated_moment(MomentKind kind, double p) const {
    if (!(p >= 0)) throw std::invalid_argument("truncated_moment: p >= 0 required");
    switch (kind) {
      case MomentKind::mu_p: return moment(p, 0.0, kInf, false);
      case MomentKind::m_p: return moment(p, 0.0, 1.0, false);
      case MomentKind::M_p: return moment(p, 1.0, kInf, false) + atom_at(1.0) * 1.0;
      case MomentKind::m_log_p: return moment(p, 0.0, 1.0, true);
      case MomentKind::m_plog_p:
        return moment(p, 0.0, 1.0, p == 1.0);
    }
    return 0.0;
  }

  // int_(a,b) z^p dlambda, optionally weighted by |log z|; open interval
  // endpoints except that atoms exactly at interior boundaries are handled
  // by atom_at() at the call site. b = inf allowed.
  double moment(double p, double a, double b, bool log_weight) const {
    switch (kind_) {
      case Kind::pareto_tail: {
        const double lo = std::max(a, 1.0);
        if (b <= lo) return 0.0;
        // density alpha z^{-alpha-1} on (1, inf)
        return power_integral(alpha_, p - alpha_ - 1.0, lo, b, log_weight);
      }
      case Kind::dirac_mixture: {
        double s = 0.0;
        for (const auto& at : atoms_)
          if (at.z > a && at.z < b)
            s += at.w * std::pow(at.z, p) *
                 (log_weight ? std::abs(std::log(at.z)) : 1.0);
        return s;
      }
      case Kind::piecewise_density:
        return pw_moment(p, a, b, log_weight);
      case Kind::restricted: {
        const double lo = std::max(a, lo_);
        const double hi = std::min(b, hi_);
        if (hi <= lo) return 0.0;
        double s = base_->moment(p, lo, hi, log_weight);
        // (lo_, hi_] is half-open: include an atom exactly at hi
        if (hi == hi_ && hi < b) {
          const double w = base_->atom_at(hi_);
          if (w > 0)
            s += w * std::pow(hi_, p) * (log_weight ? std::abs(std::log(hi_)) : 1.0);
        }
        return s;
      }
    }
    return 0.0;
  }

  double atom_at(double z) const {
    switch (kind_) {
      case Kind::dirac_mixture: {
        double s = 0.0;
        for (const auto& a : atoms_)
          if (a.z == z) s += a.w;
        return s;
      }
      case Kind::restricted:
        return (z > lo_ && z <= hi_) ? base_->atom_at(z) : 0.0;
      default:
        return 0.0;
    }
  }

  bool has_atoms() const {
    if (kind_ == Kind::dirac_mixture) return !atoms_.empty();
    if (kind_ == Kind::restricted) return base_->has_atoms();
    return false;
  }

  // One jump size from lambda restricted and normalized to (z_lo, z_hi];
  // inverse transform through the tail function.
  double sample_size(double z_lo, double z_hi, Rng& rng) const {
    const double t_hi = z_hi == kInf ? 0.0 : tail(z_hi);
    const double t_lo = tail(z_lo);
    const double m = t_lo - t_hi;
    if (!(m > 0) || !std::isfinite(m))
      throw std::invalid_argument("sample_size: interval has zero or infinite mass");
    const double level = t_hi + rng.uniform() * m;
    return std::clamp(tail_inverse(level), z_lo, z_hi);
  }

  // Poisson(T * V * mass) many i.i.d. sizes from the interval.
  std::vector<double> sample_jumps(double z_lo, double z_hi, double T, double V,
                                   Rng& rng) const {
    const double m = mass(z_lo, z_hi == kInf ? 1e300 : z_hi) +
                     (z_hi == kInf ? tail(1e300) : 0.0);
    if (!std::isfinite(m))
      throw std::invalid_argument(
          "sample_jumps: infinite mass on interval; choose z_lo > " +
          std::to_string(support_lo()) + " strictly above the divergence point");
    const auto n = rng.poisson(T * V * m);
    std::vector<double> sizes(n);
    for (auto& s : sizes) s = sample_size(z_lo, z_hi, rng);
    return sizes;
  }

  ConditionVerdict check_condition(int d, ConditionId cond, double alpha = 0.0) const;

  struct Decomposition {
    std::vector<LevyMeasure> pieces;
    // un-split lower tail lambda restricted to (0, z_cut]; empty when the
    // whole support is covered
    double remainder_cut = 0.0;
    double remainder_mass = 0.0;
  };

  // Bounded-mass decomposition: K pieces of total mass <= 2 each, mutually
  // singular, summing (with the remainder) to the input measure.
  Decomposition decompose(int K) const;

 private:
  LevyMeasure() = default;

  double segment_slope(std::size_t i) const {
    return std::log(knots_[i + 1].f / knots_[i].f) /
           std::log(knots_[i + 1].z / knots_[i].z);
  }

  // int_a^b c z^q dz with optional |log z| weight, b possibly inf
  static double power_integral(double c, double q, double a, double b,
                               bool log_weight) {
    if (b <= a) return 0.0;
    if (!log_weight) {
      if (b == kInf) {
        if (q >= -1.0) return kInf;
        return -c * std::pow(a, q + 1.0) / (q + 1.0);
      }
      if (a == 0.0 && q <= -1.0) return kInf;
      if (q == -1.0) return c * std::log(b / a);
      return c * (std::pow(b, q + 1.0) - std::pow(a, q + 1.0)) / (q + 1.0);
    }
    // weight |log z|; G is the antiderivative of z^q log z for q != -1,
    // vanishing at 0 (q > -1) and at inf (q < -1)
    auto G = [&](double z) {
      const double l = std::log(z);
      return std::pow(z, q + 1.0) * ((q + 1.0) * l - 1.0) / ((q + 1.0) * (q + 1.0));
    };
    if (b <= 1.0) {  // |log z| = -log z
      if (a == 0.0) {
        if (q <= -1.0) return kInf;
        return -c * G(b);
      }
      if (q == -1.0) {
        const double la = std::log(a), lb = std::log(b);
        return -c * 0.5 * (lb * lb - la * la);
      }
      return -c * (G(b) - G(a));
    }
    if (a >= 1.0) {
      if (b == kInf) {
        if (q >= -1.0) return kInf;
        return -c * G(a);
      }
      if (q == -1.0) {
        const double la = std::log(a), lb = std::log(b);
        return c * 0.5 * (lb * lb - la * la);
      }
      return c * (G(b) - G(a));
    }
    return power_integral(c, q, a, 1.0, true) + power_integral(c, q, 1.0, b, true);
  }

  double pw_tail(double z) const;
  double pw_tail_inverse(double level) const;
  double pw_moment(double p, double a, double b, bool log_weight) const;

  Kind kind_ = Kind::pareto_tail;
  double alpha_ = 1.0;                      // pareto_tail
  std::vector<DiracAtom> atoms_;            // dirac_mixture, z-descending
  std::vector<DensityKnot> knots_;          // piecewise_density, z-ascending
  std::shared_ptr<const LevyMeasure> base_;  // restricted
  double lo_ = 0.0, hi_ = 0.0;              // restricted
};

inline double LevyMeasure::pw_tail(double z) const {
  double s = 0.0;
  const std::size_t nseg = knots_.size() - 1;
  // above the last knot: extrapolated power law with the last slope
  {
    const double sl = segment_slope(nseg - 1);
    const auto& top = knots_.back();
    const double lo = std::max(z, top.z);
    const double c = top.f * std::pow(top.z, -sl);
    s += power_integral(c, sl, lo, kInf, false);
    if (z >= top.z) return s;
  }
  for (std::size_t i = nseg; i-- > 0;) {
    const auto& k0 = knots_[i];
    const auto& k1 = knots_[i + 1];
    if (z >= k1.z) break;
    const double sl = segment_slope(i);
    const double c = k0.f * std::pow(k0.z, -sl);
    s += power_integral(c, sl, std::max(z, k0.z), k1.z, false);
    if (z >= k0.z) break;
  }
  if (z < knots_.front().z) {
    const double sl = segment_slope(0);
    const auto& bot = knots_.front();
    const double c = bot.f * std::pow(bot.z, -sl);
    s += power_integral(c, sl, z, bot.z, false);
  }
  return s;
}

inline double LevyMeasure::pw_tail_inverse(double level) const {
  if (level <= 0.0) return kInf;
  // walk segments top-down accumulating tail mass, invert within a segment
  const std::size_t nseg = knots_.size() - 1;
  double acc = pw_tail(knots_.back().z);
  if (level < acc) {
    // invert the extrapolated top segment: tail(z) = -c z^{q+1}/(q+1)
    const double q = segment_slope(nseg - 1);
    const auto& top = knots_.back();
    const double c = top.f * std::pow(top.z, -q);
    return std::pow(-level * (q + 1.0) / c, 1.0 / (q + 1.0));
  }
  for (std::size_t i = nseg; i-- > 0;) {
    const auto& k0 = knots_[i];
    const auto& k1 = knots_[i + 1];
    const double q = segment_slope(i);
    const double c = k0.f * std::pow(k0.z, -q);
    const double seg = power_integral(c, q, k0.z, k1.z, false);
    if (level < acc + seg) {
      // solve int_z^{k1} c u^q du = level - acc
      const double want = level - acc;
      if (q == -1.0) return k1.z * std::exp(-want / c);
      const double upper = std::pow(k1.z, q + 1.0);
      return std::pow(upper - want * (q + 1.0) / c, 1.0 / (q + 1.0));
    }
    acc += seg;
  }
  // below the first knot (extrapolated); tail may diverge there
  const double q = segment_slope(0);
  const auto& bot = knots_.front();
  const double c = bot.f * std::pow(bot.z, -q);
  const double want = level - acc;
  if (q == -1.0) return bot.z * std::exp(-want / c);
  const double upper = std::pow(bot.z, q + 1.0);
  const double val = upper - want * (q + 1.0) / c;
  if (q > -1.0 && val <= 0.0) return 0.0;  // finite total mass exhausted
  return std::pow(val, 1.0 / (q + 1.0));
}

inline double LevyMeasure::pw_moment(double p, double a, double b,
                                     bool log_weight) const {
  double s = 0.0;
  const std::size_t nseg = knots_.size() - 1;
  // extrapolated ends plus interior segments, clipped to (a,b)
  {
    const double q = segment_slope(0);
    const auto& bot = knots_.front();
    const double c = bot.f * std::pow(bot.z, -q);
    const double hi = std::min(b, bot.z);
    if (a < hi) s += power_integral(c, q + p, a, hi, log_weight);
  }
  for (std::size_t i = 0; i < nseg; ++i) {
    const auto& k0 = knots_[i];
    const auto& k1 = knots_[i + 1];
    const double lo = std::max(a, k0.z);
    const double hi = std::min(b, k1.z);
    if (lo >= hi) continue;
    const double q = segment_slope(i);
    const double c = k0.f * std::pow(k0.z, -q);
    s += power_integral(c, q + p, lo, hi, log_weight);
  }
  {
    const double q = segment_slope(nseg - 1);
    const auto& top = knots_.back();
    const double c = top.f * std::pow(top.z, -q);
    const double lo = std::max(a, top.z);
    if (lo < b) s += power_integral(c, q + p, lo, b, log_weight);
  }
  return s;
}

inline ConditionVerdict LevyMeasure::check_condition(int d, ConditionId cond,
                                                     double alpha) const {
  if (d < 1) throw std::invalid_argument("check_condition: d >= 1 required");
  ConditionVerdict v;
  switch (cond) {
    case ConditionId::heavy_tail: {
      v.condition = "H(" + std::to_string(alpha) + ")";
      const double mlog = truncated_moment(MomentKind::m_log_p, 1.0 + 2.0 / d);
      v.diagnostics.push_back({"m_log_{1+2/d}", mlog});
      bool reg_var = false;
      if (kind_ == Kind::pareto_tail) {
        reg_var = std::abs(alpha_ - alpha) < 1e-12;
        v.diagnostics.push_back({"tail_exponent", alpha_});
      } else if (kind_ == Kind::piecewise_density) {
        // log-log slope over the top decade of the knot range
        const double z1 = knots_.back().z;
        const double z0 = z1 / 10.0;
        const int npts = 16;
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (int i = 0; i < npts; ++i) {
          const double z = z0 * std::pow(z1 / z0, i / (npts - 1.0));
          const double x = std::log(z), y = std::log(tail(z));
          sx += x; sy += y; sxx += x * x; sxy += x * y;
        }
        const double slope = (npts * sxy - sx * sy) / (npts * sxx - sx * sx);
        v.diagnostics.push_back({"loglog_slope", slope});
        reg_var = std::abs(-slope - alpha) <= 0.05;
      } else {
        v.diagnostics.push_back({"tail_exponent", kInf});  // tail vanishes
      }
      v.holds = reg_var && std::isfinite(mlog);
      break;
    }
    case ConditionId::light_tail: {
      v.condition = "L(" + std::to_string(alpha) + ")";
      const double mlog = truncated_moment(MomentKind::m_log_p, 1.0 + 2.0 / d);
      const double Ma = truncated_moment(MomentKind::M_p, alpha);
      v.diagnostics.push_back({"m_log_{1+2/d}", mlog});
      v.diagnostics.push_back({"M_alpha", Ma});
      v.holds = std::isfinite(mlog) && std::isfinite(Ma) && (mlog + Ma) > 0.0;
      break;
    }
    case ConditionId::sup: {
      v.condition = "Sup(d=" + std::to_string(d) + ")";
      if (d == 1) {
        const double q = 1.99;
        const double mq = truncated_moment(MomentKind::m_p, q);
        v.diagnostics.push_back({"m_q(q=1.99)", mq});
        v.holds = std::isfinite(mq);
      } else {
        const double m = truncated_moment(MomentKind::m_plog_p, 2.0 / d);
        v.diagnostics.push_back({"m_paren_log_{2/d}", m});
        v.holds = std::isfinite(m);
      }
      break;
    }
  }
  return v;
}

inline LevyMeasure::Decomposition LevyMeasure::decompose(int K) const {
  if (K < 1) throw std::invalid_argument("decompose: K >= 1 required");
  Decomposition out;
  if (has_atoms()) {
    // greedy packing of atoms (z-descending) into pieces of mass <= 2,
    // splitting atoms at piece boundaries
    std::vector<DiracAtom> pending;
    if (kind_ == Kind::dirac_mixture) pending = atoms_;
    else {  // restricted over a dirac base
      for (const auto& a : base_->atoms_)
        if (a.z > lo_ && a.z <= hi_) pending.push_back(a);
    }
    std::size_t idx = 0;
    double used_of_current = 0.0;  // mass of atoms_[idx] already assigned
    for (int k = 0; k < K && idx < pending.size(); ++k) {
      std::vector<DiracAtom> piece;
      double room = 2.0;
      while (idx < pending.size() && room > 1e-15) {
        const double avail = pending[idx].w - used_of_current;
        const double take = std::min(avail, room);
        piece.push_back({pending[idx].z, take});
        room -= take;
        used_of_current += take;
        if (used_of_current >= pending[idx].w - 1e-15) {
          ++idx;
          used_of_current = 0.0;
        }
      }
      if (!piece.empty()) out.pieces.push_back(dirac_mixture(std::move(piece)));
    }
    std::vector<DiracAtom> rem;
    if (idx < pending.size()) {
      rem.push_back({pending[idx].z, pending[idx].w - used_of_current});
      for (std::size_t j = idx + 1; j < pending.size(); ++j) rem.push_back(pending[j]);
    }
    out.remainder_cut = rem.empty() ? support_lo() : rem.back().z;
    for (const auto& a : rem) out.remainder_mass += a.w;
    return out;
  }
  // continuous tail: boundaries at integer tail levels, exactly the
  // z_nu = sup{z : tail(z) > nu} construction
  double prev = kInf;
  for (int nu = 1; nu <= K; ++nu) {
    double z = tail_inverse(static_cast<double>(nu));
    const double edge = support_lo();
    if (z < edge) z = edge;
    if (z >= prev) break;  // mass exhausted
    out.pieces.push_back(restricted(*this, z, prev == kInf ? 1e300 : prev));
    prev = z;
    if (z <= edge) break;
  }
  out.remainder_cut = (prev == kInf) ? support_lo() : prev;
  if (prev == kInf || prev <= support_lo()) {
    out.remainder_mass = 0.0;
  } else {
    const double tot = total_mass();
    out.remainder_mass = std::isfinite(tot) ? tot - tail(prev) : kInf;
  }
  return out;
}

}  // namespace she
