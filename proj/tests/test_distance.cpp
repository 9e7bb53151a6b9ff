#include <doctest.h>

#include "rde/distance.hpp"

#include <cmath>

using namespace rde;

namespace {
Eigen::VectorXd scalar(double v) { return Eigen::VectorXd::Constant(1, v); }

// scalar elliptic oracle: the flow constraint pins h(1) = int_x^y dv/V(v),
// so the distance is that integral times the unit evaluation norm
double scalar_distance_oracle(double x, double y, double eps) {
  const int steps = 20000;
  double acc = 0.0;
  for (int i = 0; i < steps; ++i) {
    const double v = x + (y - x) * (i + 0.5) / steps;
    acc += 1.0 / (1.0 + eps * std::sin(v));
  }
  return std::abs(acc * (y - x) / steps);
}
}  // namespace

TEST_CASE("connecting_path closed forms") {
  const TimeGrid g(32);

  auto id2 = registry_build("identity", {}, 2);
  Eigen::VectorXd x(2), y(2);
  x << 0.0, 1.0;
  y << 0.5, 0.25;
  Path h = dist::connecting_path(x, y, id2, g);
  for (int k = 0; k <= 32; ++k)
    CHECK((h.values.row(k) - g.node(k) * (y - x).transpose())
              .cwiseAbs()
              .maxCoeff() <= 1e-14);

  Path same = dist::connecting_path(x, x, id2, g);
  CHECK(same.values.cwiseAbs().maxCoeff() == 0.0);

  auto sigma = registry_build("const-sigma", {{"sigma", 2.5}}, 1);
  Path hs = dist::connecting_path(scalar(0.2), scalar(0.9), sigma, g);
  for (int k = 0; k <= 32; ++k)
    CHECK(hs.values(k, 0) ==
          doctest::Approx(g.node(k) * 0.7 / 2.5).epsilon(1e-12));
  const Eigen::VectorXd reached =
      sde::ito_endpoint(scalar(0.2), hs, sigma);
  CHECK(std::abs(reached(0) - 0.9) <= 1e-10);
}

TEST_CASE("distance_upper: identity field") {
  const TimeGrid g(256);
  auto id1 = registry_build("identity", {}, 1);
  CHECK(dist::distance_upper(scalar(0.0), scalar(1.0), id1, g, Hurst(0.5)) ==
        doctest::Approx(1.0).epsilon(1e-10));
  CHECK(dist::distance_upper(scalar(0.3), scalar(0.3), id1, g, Hurst(0.75)) ==
        0.0);
  // straight path at H = 0.75: grid quadratic-form value, frozen
  const double v =
      dist::distance_upper(scalar(0.0), scalar(1.0), id1, g, Hurst(0.75));
  CHECK(v >= 1.0);
  CHECK(v <= 1.5);
  CHECK(v == doctest::Approx(1.00839).epsilon(1e-3));
}

TEST_CASE("distance_optimize: identity field reaches the representer value") {
  auto id1 = registry_build("identity", {}, 1);
  for (double hv : {0.5, 0.75}) {
    auto res = dist::distance_optimize(scalar(0.0), scalar(0.25), id1,
                                       Hurst(hv));
    CHECK(res.converged);
    CHECK(res.ratio == doctest::Approx(1.0).epsilon(0.01));
    CHECK(res.optimized <= res.upper_bound + 1e-6);
    CHECK(res.endpoint_residual <= 1e-6);
  }
}

TEST_CASE("distance_optimize: two-dimensional identity field") {
  auto id2 = registry_build("identity", {}, 2);
  Eigen::VectorXd x(2), y(2);
  x << 0.1, -0.2;
  y << 0.3, 0.1;
  dist::OptimizeOptions opts;
  opts.grid_n = 32;
  auto res = dist::distance_optimize(x, y, id2, Hurst(0.75), opts);
  CHECK(res.converged);
  CHECK(res.ratio == doctest::Approx(1.0).epsilon(0.01));
  CHECK(res.optimized <= res.upper_bound + 1e-6);
}

TEST_CASE("distance_optimize: coincident endpoints take zero iterations") {
  auto id1 = registry_build("identity", {}, 1);
  auto res = dist::distance_optimize(scalar(0.4), scalar(0.4), id1,
                                     Hurst(0.75));
  CHECK(res.optimized == 0.0);
  CHECK(res.upper_bound == 0.0);
  CHECK(res.iterations == 0);
  CHECK(res.converged);
}

TEST_CASE("distance_optimize: scalar perturbed field matches the quadrature "
          "oracle") {
  auto fields = registry_build("sin-perturbed", {{"eps", 0.1}}, 1);
  const double x = 1.0, y = 1.1;
  const double oracle = scalar_distance_oracle(x, y, 0.1);
  CHECK(oracle >= 0.1 / 1.1);
  CHECK(oracle <= 0.1 / 0.9);
  for (double hv : {0.5, 0.75}) {
    auto res =
        dist::distance_optimize(scalar(x), scalar(y), fields, Hurst(hv));
    CHECK(res.converged);
    CHECK(res.optimized == doctest::Approx(oracle).epsilon(0.01));
    CHECK(res.optimized <= res.upper_bound + 1e-6);
    CHECK(res.ratio >= 1.0 / 1.1 - 0.01);
    CHECK(res.ratio <= 1.0 / 0.9 + 0.01);
  }
}

TEST_CASE("comparison_sweep: identity ratios, ordering, empty input") {
  auto id1 = registry_build("identity", {}, 1);
  std::vector<Eigen::VectorXd> dirs{scalar(1.0), scalar(-1.0)};

  auto cells = dist::comparison_sweep(scalar(0.0), {0.5, 0.1}, dirs, id1,
                                      Hurst(0.75), {}, 2);
  REQUIRE(cells.size() == 4);
  CHECK(cells[0].radius == 0.5);
  CHECK(cells[1].dir_index == 1);
  CHECK(cells[3].radius == 0.1);
  for (const auto& c : cells) {
    CHECK(c.result.ratio == doctest::Approx(1.0).epsilon(0.02));
    CHECK(c.result.optimized <= c.result.upper_bound + 1e-6);
  }

  CHECK(dist::comparison_sweep(scalar(0.0), {}, dirs, id1, Hurst(0.75))
            .empty());
  CHECK_THROWS_AS(
      dist::comparison_sweep(scalar(0.0), {1.5}, dirs, id1, Hurst(0.75)),
      ValidationError);
  CHECK_THROWS_AS(
      dist::comparison_sweep(scalar(0.0), {0.5}, {scalar(2.0)}, id1,
                             Hurst(0.75)),
      ValidationError);
}

TEST_CASE("comparison_sweep: perturbed ratios stay in a fixed band as r -> 0") {
  auto fields = registry_build("sin-perturbed", {{"eps", 0.1}}, 1);
  std::vector<Eigen::VectorXd> dirs{scalar(1.0), scalar(-1.0)};
  auto cells = dist::comparison_sweep(scalar(0.0), {0.5, 0.25, 0.1, 0.05},
                                      dirs, fields, Hurst(0.5), {}, 2);
  const double band = 1.0 / 0.9 + 0.02;
  for (const auto& c : cells) {
    CHECK(c.result.converged);
    CHECK(c.result.ratio <= band);
    CHECK(c.result.ratio >= 1.0 / band);
  }
}
