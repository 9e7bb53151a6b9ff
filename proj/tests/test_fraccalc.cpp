#include <doctest.h>

#include "rde/fraccalc.hpp"

#include <cmath>

using namespace rde;

namespace {
Path constant_one(int n) {
  return sample_function(make_grid(n), [](double) { return 1.0; });
}
}  // namespace

TEST_CASE("int_left: order one is cumulative integration") {
  Path out = frac::int_left(constant_one(64), 1.0);
  for (int k = 0; k <= 64; ++k)
    CHECK(out.values(k, 0) == doctest::Approx(k / 64.0).epsilon(1e-12));
}

TEST_CASE("int_left: Gamma-ratio closed forms at n=256") {
  const int n = 256;
  Path one = constant_one(n);
  CHECK(frac::int_left(one, 0.5).values(n, 0) ==
        doctest::Approx(1.0 / std::tgamma(1.5)).epsilon(1e-3));

  Path lin = sample_function(make_grid(n), [](double t) { return t; });
  CHECK(frac::int_left(lin, 0.5).values(n, 0) ==
        doctest::Approx(std::tgamma(2.0) / std::tgamma(2.5)).epsilon(1e-3));
}

TEST_CASE("int_right mirrors int_left exactly on the grid") {
  const int n = 128;
  Path f = sample_function(make_grid(n),
                           [](double t) { return std::cos(2.0 * t) + t; });
  Path reflected = sample_function(
      make_grid(n), [&](double t) { return std::cos(2.0 * (1.0 - t)) + (1.0 - t); });
  for (double alpha : {0.3, 0.5, 1.0}) {
    Path right = frac::int_right(f, alpha);
    Path left = frac::int_left(reflected, alpha);
    for (int k = 0; k <= n; ++k)
      CHECK(right.values(k, 0) ==
            doctest::Approx(left.values(n - k, 0)).epsilon(1e-12));
  }
  CHECK(frac::int_right(constant_one(n), 1.0).values(0, 0) ==
        doctest::Approx(1.0).epsilon(1e-12));
  CHECK(frac::int_right(constant_one(n), 0.5).values(0, 0) ==
        doctest::Approx(1.0 / std::tgamma(1.5)).epsilon(1e-3));
}

TEST_CASE("deriv_left: half derivative of sqrt is constant") {
  const int n = 512;
  Path f = sample_function(make_grid(n), [](double t) { return std::sqrt(t); });
  Path d = frac::deriv_left(f, 0.5);
  const double expected = std::tgamma(1.5);  // sqrt(pi)/2
  for (int k = 1; k <= n; ++k)
    if (make_grid(n).node(k) >= 0.05)
      CHECK(d.values(k, 0) == doctest::Approx(expected).epsilon(2e-2));
}

TEST_CASE("deriv_left: exact for linear data") {
  const int n = 64;
  Path f = sample_function(make_grid(n), [](double t) { return t; });
  Path d = frac::deriv_left(f, 0.5);
  // D^{1/2} t = 2 sqrt(t/pi); the cell quadrature is exact for linear data
  for (int k = 1; k <= n; ++k) {
    const double t = make_grid(n).node(k);
    CHECK(d.values(k, 0) ==
          doctest::Approx(2.0 * std::sqrt(t / M_PI)).epsilon(1e-12));
  }
}

TEST_CASE("deriv of zero is zero") {
  Path z(make_grid(32), 1);
  CHECK(frac::deriv_left(z, 0.4).values.cwiseAbs().maxCoeff() == 0.0);
  CHECK(frac::deriv_right(z, 0.4).values.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("deriv_right mirrors deriv_left on the grid") {
  const int n = 128;
  Path f = sample_function(make_grid(n),
                           [](double t) { return t * t + 0.3 * std::sin(t); });
  Path reflected = sample_function(make_grid(n), [&](double t) {
    const double s = 1.0 - t;
    return s * s + 0.3 * std::sin(s);
  });
  for (double alpha : {0.25, 0.6}) {
    Path right = frac::deriv_right(f, alpha);
    Path left = frac::deriv_left(reflected, alpha);
    for (int k = 0; k < n; ++k)
      CHECK(right.values(k, 0) ==
            doctest::Approx(left.values(n - k, 0)).epsilon(1e-12));
  }
}

TEST_CASE("inverse property with measured convergence order") {
  double errs[4];
  int idx = 0;
  for (int n : {64, 128, 256, 512}) {
    Path f = sample_function(make_grid(n),
                             [](double t) { return std::sin(2.0 * M_PI * t); });
    Path round = frac::deriv_left(frac::int_left(f, 0.5), 0.5);
    double worst = 0.0;
    for (int k = 1; k <= n; ++k)
      worst = std::max(worst, std::abs(round.values(k, 0) - f.values(k, 0)));
    errs[idx++] = worst;
  }
  CHECK(errs[3] <= 5e-2);
  // measured order >= 0.5 between the coarsest and finest grids
  const double order = std::log2(errs[0] / errs[3]) / 3.0;
  CHECK(order >= 0.5);
}

TEST_CASE("operators are linear to roundoff") {
  const int n = 128;
  Path f = sample_function(make_grid(n), [](double t) { return std::sin(3 * t); });
  Path g = sample_function(make_grid(n), [](double t) { return t * t; });
  Path combo(make_grid(n), 1);
  combo.values = 2.5 * f.values - 0.75 * g.values;
  for (double alpha : {0.4, 0.7}) {
    Path lhs = frac::int_left(combo, alpha);
    Path rhs(make_grid(n), 1);
    rhs.values = 2.5 * frac::int_left(f, alpha).values -
                 0.75 * frac::int_left(g, alpha).values;
    CHECK((lhs.values - rhs.values).cwiseAbs().maxCoeff() <= 1e-12);

    Path dl = frac::deriv_left(combo, alpha);
    Path dr(make_grid(n), 1);
    dr.values = 2.5 * frac::deriv_left(f, alpha).values -
                0.75 * frac::deriv_left(g, alpha).values;
    CHECK((dl.values - dr.values).cwiseAbs().maxCoeff() <= 1e-10);
  }
}

TEST_CASE("derivative rejects orders outside (0,1)") {
  Path f = constant_one(16);
  CHECK_THROWS_AS(frac::deriv_left(f, 1.0), ValidationError);
  CHECK_THROWS_AS(frac::deriv_left(f, 0.0), ValidationError);
  CHECK_THROWS_AS(frac::int_left(f, 0.0), ValidationError);
}
