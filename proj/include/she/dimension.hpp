#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

#include "she/kernel.hpp"
#include "she/solver.hpp"
#include "she/special.hpp"
#include "she/stats.hpp"

namespace she {

struct PeakSet {
  int d = 1;
  std::vector<std::vector<double>> points;
  double max_radius = 0.0;  // sup-norm radius through which membership is known
  std::string threshold_desc;
};

struct ShellCount {
  int n = 0;
  std::uint64_t C = 0;
};

namespace detail {

inline double sup_norm(const std::vector<double>& p) {
  double m = 0.0;
  for (double c : p) m = std::max(m, std::abs(c));
  return m;
}

inline double euclid_norm(const std::vector<double>& p) {
  double s = 0.0;
  for (double c : p) s += c * c;
  return std::sqrt(s);
}

inline std::int64_t pack_cells(const std::vector<std::int64_t>& q) {
  std::int64_t k = 1469598103934665603LL;
  for (auto c : q) k = (k ^ c) * 1099511628211LL;
  return k;
}

}  // namespace detail

// Occupied unit lattice cubes per shell S_n = B_inf(e^{n-1}, e^n); a point
// occupies the cube centered at its coordinatewise rounding.
inline std::vector<ShellCount> annulus_counts(const PeakSet& set, int n_lo, int n_hi) {
  if (n_lo < 1 || n_hi < n_lo)
    throw std::invalid_argument("annulus_counts: need 1 <= n_lo <= n_hi");
  if (std::exp(static_cast<double>(n_hi)) > set.max_radius + 0.5) {
    const int max_n = static_cast<int>(std::floor(std::log(set.max_radius + 0.5)));
    throw std::invalid_argument("annulus_counts: set only known through n = " +
                                std::to_string(max_n));
  }
  std::vector<std::unordered_set<std::int64_t>> occupied(
      static_cast<std::size_t>(n_hi - n_lo + 1));
  std::vector<std::int64_t> q;
  for (const auto& p : set.points) {
    q.clear();
    double sup = 0.0;
    for (double c : p) {
      const auto r = static_cast<std::int64_t>(std::llround(c));
      q.push_back(r);
      sup = std::max(sup, std::abs(static_cast<double>(r)));
    }
    for (int n = n_lo; n <= n_hi; ++n) {
      if (sup > std::exp(n - 1.0) && sup <= std::exp(static_cast<double>(n))) {
        occupied[static_cast<std::size_t>(n - n_lo)].insert(detail::pack_cells(q));
        break;
      }
    }
  }
  std::vector<ShellCount> out;
  for (int n = n_lo; n <= n_hi; ++n)
    out.push_back({n, occupied[static_cast<std::size_t>(n - n_lo)].size()});
  return out;
}

struct MinkowskiSummary {
  bool bounded = false;       // all shells empty: dimension negative
  double max_over_window = 0.0;
  double ols_slope = 0.0;
  std::vector<double> a_n;    // log_+(C_n) / n per shell
};

inline MinkowskiSummary minkowski_dim(const std::vector<ShellCount>& counts,
                                      int window = 5) {
  MinkowskiSummary s;
  std::vector<double> xs, ys;
  for (const auto& c : counts) {
    s.a_n.push_back(log_plus(static_cast<double>(c.C)) / c.n);
    if (c.C > 0) {
      xs.push_back(static_cast<double>(c.n));
      ys.push_back(std::log(static_cast<double>(c.C)));
    }
  }
  if (xs.empty()) {
    s.bounded = true;
    return s;
  }
  const std::size_t lo =
      s.a_n.size() > static_cast<std::size_t>(window) ? s.a_n.size() - window : 0;
  s.max_over_window = 0.0;
  for (std::size_t i = lo; i < s.a_n.size(); ++i)
    s.max_over_window = std::max(s.max_over_window, s.a_n[i]);
  s.ols_slope = xs.size() >= 3 ? ols(xs, ys).slope : s.max_over_window;
  return s;
}

struct HausdorffResult {
  double rho_star = 0.0;
  std::vector<std::pair<double, double>> sums;  // (rho, sum of C_n e^{-n rho})
};

// Upper-bound estimator from unit-cube covers: nu_hat^n_rho = C_n e^{-n rho}.
// rho* is the first grid rho whose term sequence has a decreasing tail
// ending below tail_threshold.
inline HausdorffResult hausdorff_dim_upper(const std::vector<ShellCount>& counts,
                                           const std::vector<double>& rho_grid,
                                           double tail_threshold = 1.0) {
  if (rho_grid.empty())
    throw std::invalid_argument("hausdorff_dim_upper: empty grid");
  HausdorffResult out;
  out.rho_star = rho_grid.back();
  bool found = false;
  for (double rho : rho_grid) {
    double total = 0.0;
    std::vector<double> terms;
    for (const auto& c : counts) {
      const double t = static_cast<double>(c.C) * std::exp(-c.n * rho);
      terms.push_back(t);
      total += t;
    }
    out.sums.emplace_back(rho, total);
    if (!found && !terms.empty()) {
      const double last = terms.back();
      const std::size_t back = terms.size() > 3 ? terms.size() - 4 : 0;
      if (last < tail_threshold && last <= terms[back]) {
        out.rho_star = rho;
        found = true;
      }
    }
  }
  return out;
}

// Threshold families for peak-set membership Y(t,x) >= threshold(|x|).
struct PeakVariant {
  enum class Tag { gamma, scaled, F_M } tag = Tag::gamma;
  enum class Flavor { mult_c, add_c, add_d } flavor = Flavor::mult_c;  // scaled
  enum class Regime { EMb, EM, EMc } regime = Regime::EMb;             // F_M
  int d = 1;
  double gamma = 0.0;
  int N = 1;
  double alpha = 1.0;
  double M = 0.0;

  double threshold(double r) const {
    switch (tag) {
      case Tag::gamma:
        return std::pow(r, gamma);
      case Tag::scaled: {
        double v = flavor == Flavor::mult_c ? std::pow(r, 0.5 * d * d)
                                            : std::pow(r, d / alpha);
        const double pe = flavor == Flavor::mult_c ? 0.5 * d : 1.0 / alpha;
        for (int p = 1; p <= N - 1; ++p) v *= std::pow(iterated_log(p, r), pe);
        return v * std::pow(iterated_log(N, r), gamma / d);
      }
      case Tag::F_M: {
        if (regime == Regime::EMc) {
          const double ex =
              M * log_plus(r) * iterated_log(3, r) / iterated_log(2, r);
          return std::pow(r, static_cast<double>(d) * d / (2.0 + d)) * std::exp(ex);
        }
        const double kappa = 1.0 / (1.0 + theta(alpha, d));
        return std::pow(r, d / alpha) * std::exp(M * std::pow(log_plus(r), kappa));
      }
    }
    return 1.0;
  }

  bool wants_multiplicative() const {
    if (tag == Tag::scaled) return flavor == Flavor::mult_c;
    return tag == Tag::F_M;
  }

  std::string describe() const {
    switch (tag) {
      case Tag::gamma: return "gamma(" + std::to_string(gamma) + ")";
      case Tag::scaled:
        return "scaled(N=" + std::to_string(N) + ",gamma=" + std::to_string(gamma) + ")";
      case Tag::F_M: return "F_M(M=" + std::to_string(M) + ")";
    }
    return "";
  }
};

inline PeakSet extract_peak_set(const FieldSample& field, const PeakVariant& v) {
  if (v.tag != PeakVariant::Tag::gamma) {
    const bool field_mult = field.mode == Mode::multiplicative;
    if (field_mult != v.wants_multiplicative())
      throw std::invalid_argument("extract_peak_set: field mode does not match variant");
  }
  PeakSet set;
  set.d = v.d;
  set.threshold_desc = v.describe();
  for (std::size_t i = 0; i < field.points.size(); ++i) {
    const double r = detail::euclid_norm(field.points[i]);
    if (field.values[i] >= v.threshold(r)) set.points.push_back(field.points[i]);
    set.max_radius = std::max(set.max_radius, detail::sup_norm(field.points[i]));
  }
  return set;
}

struct PointMap {
  enum class Tag { iterlog_then_root, F_transform_A, F_transform_H } tag =
      Tag::iterlog_then_root;
  int N = 1;
  int d = 1;
  double theta_alpha = 0.5;

  double scalar(double r) const {
    switch (tag) {
      case Tag::iterlog_then_root:
        return std::pow(iterated_log(N, r), 1.0 / d);
      case Tag::F_transform_A:
        return std::exp(std::pow(log_plus(r), 1.0 / (1.0 + theta_alpha)));
      case Tag::F_transform_H:
        return std::exp(log_plus(r) * iterated_log(3, r) / iterated_log(2, r));
    }
    return r;
  }
};

// x -> (x/|x|) phi(|x|) with phi the scalar map, log_+ at every level
inline std::vector<std::vector<double>> transform_points(
    const std::vector<std::vector<double>>& points, const PointMap& map) {
  std::vector<std::vector<double>> out;
  out.reserve(points.size());
  for (const auto& p : points) {
    const double r = detail::euclid_norm(p);
    if (r == 0.0) throw std::invalid_argument("transform_points: zero point");
    const double s = map.scalar(r) / r;
    auto q = p;
    for (auto& c : q) c *= s;
    out.push_back(std::move(q));
  }
  return out;
}

struct ThickResult {
  bool thick = false;
  int burn_in = 0;             // smallest n from which no cube fails
  int first_failure_n = -1;
  std::int64_t first_failure_k = -1;
  std::uint64_t failures = 0;
};

// Every cube of side e^{theta n} centered on the grid
// {e^{n-1} + i e^{theta n} : 1 <= i <= floor(e^{n(1-theta)} - e^{n(1-theta)-1})}^d
// must meet the set, for each n in range.
inline ThickResult theta_thick_check(const PeakSet& set, double th, int n_lo,
                                     int n_hi) {
  if (!(th > 0.0) || !(th < 1.0))
    throw std::invalid_argument("theta_thick_check: theta in (0,1)");
  ThickResult res;
  res.burn_in = n_hi + 1;
  std::vector<bool> n_ok(static_cast<std::size_t>(n_hi - n_lo + 1), true);
  for (int n = n_lo; n <= n_hi; ++n) {
    const double side = std::exp(th * n);
    const double base = std::exp(n - 1.0);
    const auto I_max = static_cast<std::int64_t>(
        std::floor(std::exp(n * (1.0 - th)) - std::exp(n * (1.0 - th) - 1.0)));
    if (I_max < 1) continue;
    // total cubes I_max^d; covered indices collected by rounding
    double total_d = 1.0;
    for (int j = 0; j < set.d; ++j) total_d *= static_cast<double>(I_max);
    if (total_d > 5e7)
      throw std::invalid_argument("theta_thick_check: grid too large at n = " +
                                  std::to_string(n));
    std::unordered_set<std::int64_t> covered;
    std::vector<std::int64_t> idx(static_cast<std::size_t>(set.d));
    for (const auto& p : set.points) {
      bool inside = true;
      for (int j = 0; j < set.d; ++j) {
        const double c = p[static_cast<std::size_t>(j)];
        const auto i = static_cast<std::int64_t>(std::llround((c - base) / side));
        if (i < 1 || i > I_max ||
            std::abs(c - (base + static_cast<double>(i) * side)) > 0.5 * side) {
          inside = false;
          break;
        }
        idx[static_cast<std::size_t>(j)] = i;
      }
      if (inside) covered.insert(detail::pack_cells(idx));
    }
    const auto want = static_cast<std::uint64_t>(total_d);
    if (covered.size() < want) {
      n_ok[static_cast<std::size_t>(n - n_lo)] = false;
      res.failures += want - covered.size();
      if (res.first_failure_n < 0) {
        res.first_failure_n = n;
        // smallest uncovered flat index along the first axis scan
        std::vector<std::int64_t> probe(static_cast<std::size_t>(set.d), 1);
        for (std::int64_t flat = 0;; ++flat) {
          if (covered.find(detail::pack_cells(probe)) == covered.end()) {
            res.first_failure_k = flat;
            break;
          }
          int j = 0;
          for (; j < set.d; ++j) {
            if (++probe[static_cast<std::size_t>(j)] <= I_max) break;
            probe[static_cast<std::size_t>(j)] = 1;
          }
          if (j == set.d) break;
        }
      }
    }
  }
  for (int n = n_hi; n >= n_lo; --n) {
    if (!n_ok[static_cast<std::size_t>(n - n_lo)]) break;
    res.burn_in = n;
  }
  res.thick = res.burn_in <= n_hi;
  return res;
}

}  // namespace she
