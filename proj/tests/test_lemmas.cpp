#include <doctest.h>

#include <cmath>
#include <vector>

#include "she/lemmas.hpp"

using namespace she;

TEST_CASE("two-sided bound on the product-log function") {
  std::vector<double> grid;
  for (double x = 3.0; x < 1e10; x *= 1.37) grid.push_back(x);
  const auto res = lambert_w_bounds_check(grid);
  CHECK(res.pass);
  CHECK(res.margin >= 0.0);
}

TEST_CASE("closed-form iterated integral, pinned coefficients") {
  // alpha = beta = 0: H_1 = 1, H_2 = 1 + 2 log R, c_{3,2} = 9/2
  const auto h1 = iter_int_closed(1, 0.0, 0.0, 5.0);
  CHECK(h1.value == doctest::Approx(1.0).epsilon(1e-13));
  const auto h2 = iter_int_closed(2, 0.0, 0.0, 10.0);
  REQUIRE(h2.coefficients.size() == 2);
  CHECK(h2.coefficients[0] == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(h2.coefficients[1] == doctest::Approx(2.0).epsilon(1e-13));
  CHECK(h2.value == doctest::Approx(1.0 + 2.0 * std::log(10.0)).epsilon(1e-13));
  const auto h3 = iter_int_closed(3, 0.0, 0.0, 2.0);
  CHECK(h3.coefficients[2] == doctest::Approx(4.5).epsilon(1e-13));
  // alpha = 0, beta = 1, N = 1: int_0^1 log(1/y) dy = 1
  CHECK(iter_int_closed(1, 0.0, 1.0, 3.0).value == doctest::Approx(1.0).epsilon(1e-13));
  CHECK_THROWS_AS(iter_int_closed(0, 0.0, 0.0, 2.0), std::invalid_argument);
  CHECK_THROWS_AS(iter_int_closed(1, 0.0, 0.0, 0.5), std::invalid_argument);
}

TEST_CASE("closed form agrees with nested quadrature") {
  for (int N : {1, 2, 3}) {
    for (double alpha : {0.0, 0.5}) {
      for (double beta : {0.0, 1.0}) {
        for (double R : {1.5, 4.0}) {
          const double closed = iter_int_closed(N, alpha, beta, R).value;
          const auto orc = iter_int_quadrature(N, alpha, beta, R);
          const double tol = std::max(orc.error, 1e-6 * closed);
          CHECK(std::abs(closed - orc.value) <= 10.0 * tol);
        }
      }
    }
  }
  CHECK_THROWS_AS(iter_int_quadrature(4, 0.0, 0.0, 2.0), std::invalid_argument);
}

TEST_CASE("closed form agrees with Monte Carlo") {
  const int N = 4;
  const double alpha = 0.5, beta = 1.0, R = 3.0;
  const double closed = iter_int_closed(N, alpha, beta, R).value;
  const auto mc = iter_int_monte_carlo(N, alpha, beta, R, 2000000, 77);
  CHECK(std::abs(closed - mc.value) <= 4.0 * mc.error);
  CHECK(mc.error < 0.05 * closed);
}

TEST_CASE("power series over gamma roots reduces to the exponential") {
  // alpha = beta = gamma = 1: sum z^N / N! = e^z
  for (double z : {0.0, 0.5, 2.0, 10.0})
    CHECK(gamma_power_series(1.0, 1.0, 1.0, z) ==
          doctest::Approx(std::exp(z)).epsilon(1e-12));
  CHECK_THROWS_AS(gamma_power_series(0.0, 1.0, 1.0, 1.0), std::invalid_argument);
}

TEST_CASE("stretched-exponential envelope for the gamma-root series") {
  std::vector<double> zs;
  for (double z = 0.01; z < 50.0; z *= 1.5) zs.push_back(z);
  const std::vector<double> Cs = {0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0};
  for (auto [a, g] : std::vector<std::pair<double, double>>{
           {1.0, 1.0}, {0.5, 1.0}, {2.0, 1.0}, {1.0, 2.0}}) {
    const auto res = gamma_series_bound_check(a, 1.0, g, zs, Cs);
    CHECK(res.pass);
    CHECK(res.margin >= 0.0);
  }
  // an impossibly small envelope grid fails
  const auto bad = gamma_series_bound_check(1.0, 1.0, 1.0, zs, {1e-9});
  CHECK(!bad.pass);
}

TEST_CASE("second-moment lower bounds hold exactly on discrete laws") {
  DiscreteLaw law;
  law.values = {0.0, 1.0, 4.0};
  law.probs = {0.3, 0.5, 0.2};
  const auto res = paley_zygmund_check(law, 0.5, 0.5, 2.0);
  CHECK(res.pass);
  CHECK(res.margin >= 0.0);
  // hand-check the tail side: E X = 1.3, delta E X = 0.65,
  // P(X > 0.65) = 0.7 >= (1-delta)^2 (EX)^2 / E X^2 = 0.25 * 1.69 / 3.7
  CHECK(0.7 >= 0.25 * 1.69 / 3.7);
  Rng rng(55);
  for (int i = 0; i < 200; ++i) {
    DiscreteLaw l;
    const int k = 2 + static_cast<int>(rng.uniform(0.0, 4.0));
    double tot = 0.0;
    for (int j = 0; j < k; ++j) {
      l.values.push_back(rng.uniform(0.0, 10.0));
      l.probs.push_back(rng.uniform(0.05, 1.0));
      tot += l.probs.back();
    }
    for (auto& p : l.probs) p /= tot;
    const auto r = paley_zygmund_check(l, rng.uniform(0.1, 0.9),
                                       rng.uniform(0.1, 0.9),
                                       1.0 + rng.uniform(0.2, 3.0));
    CHECK(r.pass);
  }
  CHECK_THROWS_AS(paley_zygmund_check(law, 1.5, 0.5, 2.0), std::invalid_argument);
}

TEST_CASE("decoupled comparison inequality on the toy point process") {
  DecouplingToy toy;
  Rng rng(56);
  // locate interesting thresholds from a pilot run
  std::vector<double> pilot(20000);
  for (auto& x : pilot) x = decoupling_toy_draw(toy, false, rng);
  std::sort(pilot.begin(), pilot.end());
  std::vector<double> R_grid;
  for (double q : {0.5, 0.9, 0.99})
    R_grid.push_back(pilot[static_cast<std::size_t>(q * (pilot.size() - 1))]);
  for (double th : {0.1, 0.05}) {
    const auto res = decoupling_check(toy, th, R_grid, 40000, 57);
    CHECK(res.pass);
  }
  CHECK_THROWS_AS(decoupling_check(toy, 1.5, R_grid, 100, 1), std::invalid_argument);
}

TEST_CASE("toy draws are reproducible and heavier when coupled counts grow") {
  Rng a(58), b(58);
  DecouplingToy toy;
  for (int i = 0; i < 50; ++i)
    CHECK(decoupling_toy_draw(toy, false, a) == decoupling_toy_draw(toy, false, b));
}
