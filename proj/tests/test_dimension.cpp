#include <doctest.h>

#include <cmath>
#include <vector>

#include "she/dimension.hpp"

using namespace she;

namespace {

PeakSet lattice_set(double radius, int d = 1) {
  PeakSet s;
  s.d = d;
  s.max_radius = radius;
  for (std::int64_t x = -static_cast<std::int64_t>(radius);
       x <= static_cast<std::int64_t>(radius); ++x)
    s.points.push_back({static_cast<double>(x)});
  return s;
}

}  // namespace

TEST_CASE("shell cube counts on a hand case") {
  PeakSet s;
  s.d = 1;
  s.max_radius = 7.0;
  s.points = {{2.0}, {2.4}, {7.0}, {-0.3}};  // -0.3 rounds into the center cube
  const auto counts = annulus_counts(s, 1, 2);
  REQUIRE(counts.size() == 2);
  CHECK(counts[0].n == 1);
  CHECK(counts[0].C == 1);  // 2.0 and 2.4 share the cube at 2
  CHECK(counts[1].n == 2);
  CHECK(counts[1].C == 1);  // 7.0
  CHECK_THROWS_AS(annulus_counts(s, 1, 3), std::invalid_argument);
  CHECK_THROWS_AS(annulus_counts(s, 0, 2), std::invalid_argument);
}

TEST_CASE("box dimension of the full lattice is one") {
  const auto s = lattice_set(std::exp(9.0));
  const auto counts = annulus_counts(s, 1, 9);
  const auto mink = minkowski_dim(counts);
  CHECK(!mink.bounded);
  // C_n = 2(e^n - e^{n-1}), so a_n = 1 + log(2 - 2/e)/n slightly above 1
  CHECK(mink.max_over_window > 0.95);
  CHECK(mink.max_over_window < 1.1);
  CHECK(mink.ols_slope == doctest::Approx(1.0).epsilon(0.05));
  REQUIRE(mink.a_n.size() == 9);
  for (double a : mink.a_n) CHECK(a <= 1.3);
}

TEST_CASE("box dimension of a thinned lattice tracks the thinning exponent") {
  // keep x iff an integer multiple of round(|x|^{0.4}): C_n ~ e^{0.6 n}
  PeakSet s;
  s.d = 1;
  s.max_radius = std::exp(12.0);
  for (std::int64_t x = 1; x <= static_cast<std::int64_t>(std::exp(12.0)); ++x) {
    const auto step =
        std::max<std::int64_t>(1, static_cast<std::int64_t>(std::pow(x, 0.4)));
    if (x % step == 0) s.points.push_back({static_cast<double>(x)});
  }
  const auto counts = annulus_counts(s, 1, 12);
  const auto mink = minkowski_dim(counts);
  CHECK(mink.max_over_window == doctest::Approx(0.6).epsilon(0.12));
  CHECK(mink.ols_slope == doctest::Approx(0.6).epsilon(0.12));
}

TEST_CASE("empty and bounded sets have degenerate dimension summaries") {
  PeakSet s;
  s.d = 1;
  s.max_radius = std::exp(8.0);
  s.points = {{2.0}};
  const auto counts = annulus_counts(s, 1, 8);
  const auto mink = minkowski_dim(counts);
  CHECK(!mink.bounded);
  // a_n = log_+(C_n)/n = 1/n here; the trailing window tops out at 1/4
  CHECK(mink.max_over_window <= 1.0 / 4.0 + 1e-9);
  PeakSet empty;
  empty.d = 1;
  empty.max_radius = std::exp(4.0);
  CHECK(minkowski_dim(annulus_counts(empty, 1, 4)).bounded);
}

TEST_CASE("cover-sum dimension bound brackets the box dimension") {
  const auto s = lattice_set(std::exp(10.0));
  const auto counts = annulus_counts(s, 1, 10);
  std::vector<double> grid;
  for (double r = 0.05; r <= 1.5; r += 0.05) grid.push_back(r);
  const auto h = hausdorff_dim_upper(counts, grid);
  CHECK(h.rho_star >= 0.95);
  CHECK(h.rho_star <= 1.2);
  CHECK(h.sums.size() == grid.size());
  // sums decrease in rho
  for (std::size_t i = 1; i < h.sums.size(); ++i)
    CHECK(h.sums[i].second <= h.sums[i - 1].second + 1e-12);
  // a single point is covered at the smallest grid value
  PeakSet tiny;
  tiny.d = 1;
  tiny.max_radius = std::exp(6.0);
  tiny.points = {{2.0}};
  const auto ht = hausdorff_dim_upper(annulus_counts(tiny, 1, 6), grid);
  CHECK(ht.rho_star == doctest::Approx(0.05));
  CHECK_THROWS_AS(hausdorff_dim_upper(counts, {}), std::invalid_argument);
}

TEST_CASE("threshold families evaluate as documented") {
  PeakVariant g;
  g.tag = PeakVariant::Tag::gamma;
  g.gamma = 0.5;
  CHECK(g.threshold(100.0) == doctest::Approx(10.0));

  PeakVariant sc;
  sc.tag = PeakVariant::Tag::scaled;
  sc.flavor = PeakVariant::Flavor::mult_c;
  sc.d = 1;
  sc.N = 1;
  sc.gamma = 0.5;
  CHECK(sc.threshold(100.0) ==
        doctest::Approx(std::pow(100.0, 0.5) * std::pow(std::log(100.0), 0.5)));
  sc.N = 2;
  CHECK(sc.threshold(1e6) ==
        doctest::Approx(std::pow(1e6, 0.5) * std::pow(std::log(1e6), 0.5) *
                        std::pow(log_plus(std::log(1e6)), 0.5)));
  PeakVariant ad;
  ad.tag = PeakVariant::Tag::scaled;
  ad.flavor = PeakVariant::Flavor::add_c;
  ad.d = 1;
  ad.N = 1;
  ad.alpha = 0.5;
  ad.gamma = 1.0;
  CHECK(ad.threshold(100.0) ==
        doctest::Approx(std::pow(100.0, 2.0) * std::log(100.0)));

  PeakVariant fm;
  fm.tag = PeakVariant::Tag::F_M;
  fm.regime = PeakVariant::Regime::EMb;
  fm.d = 1;
  fm.alpha = 1.0;  // theta = 1, exponent 1/2
  fm.M = 2.0;
  CHECK(fm.threshold(1e4) ==
        doctest::Approx(1e4 * std::exp(2.0 * std::sqrt(std::log(1e4)))));
  fm.regime = PeakVariant::Regime::EMc;
  const double r = 1e6;
  const double ex = 2.0 * std::log(r) * iterated_log(3, r) / iterated_log(2, r);
  CHECK(fm.threshold(r) == doctest::Approx(std::pow(r, 1.0 / 3.0) * std::exp(ex)));
}

TEST_CASE("peak extraction respects the field mode") {
  FieldSample add;
  add.mode = Mode::additive;
  add.points = {{1.0}, {4.0}, {-9.0}};
  add.values = {5.0, 1.0, 4.0};
  PeakVariant g;
  g.tag = PeakVariant::Tag::gamma;
  g.gamma = 0.5;
  const auto set = extract_peak_set(add, g);
  REQUIRE(set.points.size() == 2);  // 5 >= 1, 1 < 2, 4 >= 3
  CHECK(set.max_radius == doctest::Approx(9.0));
  PeakVariant fm;
  fm.tag = PeakVariant::Tag::F_M;
  CHECK_THROWS_AS(extract_peak_set(add, fm), std::invalid_argument);
  FieldSample mult = add;
  mult.mode = Mode::multiplicative;
  CHECK_NOTHROW(extract_peak_set(mult, fm));
}

TEST_CASE("radial point transforms") {
  PointMap il;
  il.tag = PointMap::Tag::iterlog_then_root;
  il.N = 1;
  il.d = 2;
  const auto out = transform_points({{std::exp(9.0), 0.0}}, il);
  CHECK(out[0][0] == doctest::Approx(3.0));
  CHECK(out[0][1] == doctest::Approx(0.0));
  PointMap fa;
  fa.tag = PointMap::Tag::F_transform_A;
  fa.theta_alpha = 1.0;
  const auto oa = transform_points({{-std::exp(16.0)}}, fa);
  CHECK(oa[0][0] == doctest::Approx(-std::exp(4.0)));
  CHECK_THROWS_AS(transform_points({{0.0}}, il), std::invalid_argument);
}

TEST_CASE("thick-grid coverage check") {
  const double th = 0.5;
  const int n_lo = 3, n_hi = 6;
  // a set containing every grid center is thick with no burn-in
  PeakSet full;
  full.d = 1;
  full.max_radius = std::exp(7.0);
  for (int n = n_lo; n <= n_hi; ++n) {
    const double side = std::exp(th * n);
    const double base = std::exp(n - 1.0);
    const auto I_max = static_cast<std::int64_t>(
        std::floor(std::exp(n * (1.0 - th)) - std::exp(n * (1.0 - th) - 1.0)));
    for (std::int64_t i = 1; i <= I_max; ++i)
      full.points.push_back({base + static_cast<double>(i) * side});
  }
  const auto ok = theta_thick_check(full, th, n_lo, n_hi);
  CHECK(ok.thick);
  CHECK(ok.burn_in == n_lo);
  CHECK(ok.failures == 0);
  // removing the last shell's points pushes failures to the top shell
  PeakSet partial = full;
  partial.points.clear();
  for (const auto& p : full.points)
    if (p[0] < std::exp(5.0)) partial.points.push_back(p);
  const auto bad = theta_thick_check(partial, th, n_lo, n_hi);
  CHECK(!bad.thick);
  CHECK(bad.failures > 0);
  CHECK(bad.first_failure_n == 6);
  CHECK_THROWS_AS(theta_thick_check(full, 1.5, n_lo, n_hi), std::invalid_argument);
}
