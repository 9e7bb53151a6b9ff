#include <doctest.h>

#include "rde/density.hpp"

#include <cmath>

using namespace rde;

namespace {
Eigen::VectorXd scalar(double v) { return Eigen::VectorXd::Constant(1, v); }
}  // namespace

TEST_CASE("sample_endpoints: identity field gives Gaussian endpoints") {
  auto id1 = registry_build("identity", {}, 1);
  const double t = 0.25;
  const Hurst h(0.5);
  const std::int64_t count = 100000;
  Eigen::MatrixXd e =
      dens::sample_endpoints(t, scalar(0.3), id1, h, count, 5, 16);
  REQUIRE(e.rows() == count);
  const double mean = e.col(0).mean();
  const double var =
      (e.col(0).array() - mean).square().sum() / (count - 1);
  const double target = std::pow(t, 2.0 * h.value());
  CHECK(std::abs(mean - 0.3) <= 3.0 * std::sqrt(target / count));
  CHECK(std::abs(var - target) <=
        3.0 * target * std::sqrt(2.0 / (count - 1)));
}

TEST_CASE("sample_endpoints: edge cases") {
  auto id1 = registry_build("identity", {}, 1);
  CHECK(dens::sample_endpoints(1.0, scalar(0.0), id1, Hurst(0.5), 0, 1, 16)
            .rows() == 0);
  CHECK_THROWS_AS(
      dens::sample_endpoints(0.0, scalar(0.0), id1, Hurst(0.5), 10, 1, 16),
      ValidationError);
  CHECK_THROWS_AS(
      dens::sample_endpoints(1.5, scalar(0.0), id1, Hurst(0.5), 10, 1, 16),
      ValidationError);
}

TEST_CASE("kde_at: Gaussian mode values") {
  auto id1 = registry_build("identity", {}, 1);
  const std::int64_t count = 100000;
  // t = 1, H any: endpoints are x + B_1 ~ N(x, 1)
  Eigen::MatrixXd e =
      dens::sample_endpoints(1.0, scalar(0.0), id1, Hurst(0.5), count, 9, 16);
  auto est = dens::kde_at(e, scalar(0.0));
  CHECK(est.value ==
        doctest::Approx(1.0 / std::sqrt(2.0 * M_PI)).epsilon(0.05));
  CHECK(est.mc_stderr > 0.0);
  CHECK(est.sample_count == count);

  // two dimensions at t = 0.25: product Gaussian with variance 1/4
  auto id2 = registry_build("identity", {}, 2);
  Eigen::MatrixXd e2 = dens::sample_endpoints(0.25, Eigen::VectorXd::Zero(2),
                                              id2, Hurst(0.5), count, 9, 16);
  auto est2 = dens::kde_at(e2, Eigen::VectorXd::Zero(2));
  CHECK(est2.value ==
        doctest::Approx(1.0 / (2.0 * M_PI * 0.25)).epsilon(0.05));
}

TEST_CASE("kde_at: rejects degenerate inputs") {
  Eigen::MatrixXd flat = Eigen::MatrixXd::Zero(500, 1);
  CHECK_THROWS_AS(dens::kde_at(flat, scalar(0.0)), ValidationError);
  Eigen::MatrixXd tiny = Eigen::MatrixXd::Random(50, 1);
  CHECK_THROWS_AS(dens::kde_at(tiny, scalar(0.0)), ValidationError);
}

TEST_CASE("kde_at: error bar shrinks like the square root of the count") {
  auto id1 = registry_build("identity", {}, 1);
  Eigen::MatrixXd big =
      dens::sample_endpoints(1.0, scalar(0.0), id1, Hurst(0.5), 80000, 13, 16);
  auto full = dens::kde_at(big, scalar(0.4));
  auto half = dens::kde_at(big.topRows(40000), scalar(0.4));
  const double shrink = full.mc_stderr / half.mc_stderr;
  CHECK(shrink == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(0.2));
}

TEST_CASE("lower_bound_check: identity field matches the Gaussian constant") {
  auto id1 = registry_build("identity", {}, 1);
  auto res = dens::lower_bound_check(scalar(0.0), scalar(1.0), id1,
                                     Hurst(0.5), {0.5, 0.25, 0.125}, 100000,
                                     17, 32);
  const double target = std::exp(-0.5) / std::sqrt(2.0 * M_PI);
  REQUIRE(res.rows.size() == 3);
  for (const auto& row : res.rows)
    CHECK(row.scaled == doctest::Approx(target).epsilon(0.05));
  CHECK(res.positive_at_3se);
  CHECK(res.stable);
}

TEST_CASE("lower_bound_check: two-dimensional identity constant") {
  auto id2 = registry_build("identity", {}, 2);
  Eigen::VectorXd u(2);
  u << 1.0, 0.0;
  auto res = dens::lower_bound_check(Eigen::VectorXd::Zero(2), u, id2,
                                     Hurst(0.5), {0.5, 0.25, 0.125}, 100000,
                                     29, 16);
  const double target = std::exp(-0.5) / (2.0 * M_PI);
  for (const auto& row : res.rows)
    CHECK(row.scaled == doctest::Approx(target).epsilon(0.05));
  CHECK(res.positive_at_3se);
  CHECK(res.stable);
}

TEST_CASE("varadhan_diagnostic: identity field trend") {
  auto id1 = registry_build("identity", {}, 1);
  const double c = 0.5;
  auto res = dens::varadhan_diagnostic(scalar(0.0), scalar(c), id1,
                                       Hurst(0.5), {0.25, 0.125, 0.0625},
                                       40000, 19, 32);
  REQUIRE(res.rows.size() == 3);
  CHECK(res.distance.optimized == doctest::Approx(c).epsilon(0.01));
  CHECK(res.neg_half_dist_sq == doctest::Approx(-c * c / 2.0).epsilon(0.03));
  // exact finite-t value for the Gaussian law: t^{2H} log p(t) =
  // -c^2/2 - t^{2H} log sqrt(2 pi t^{2H}); the estimate tracks it
  for (const auto& row : res.rows) {
    REQUIRE(row.valid);
    const double t2h = std::pow(row.t, 2.0 * 0.5);
    const double exact =
        -c * c / 2.0 - t2h * 0.5 * std::log(2.0 * M_PI * t2h);
    CHECK(row.t2h_log_phat == doctest::Approx(exact).epsilon(0.05));
  }
  // visible trend toward the limit between the largest and smallest t
  const double gap_first =
      std::abs(res.rows.front().t2h_log_phat - res.neg_half_dist_sq);
  const double gap_last =
      std::abs(res.rows.back().t2h_log_phat - res.neg_half_dist_sq);
  CHECK(gap_last < gap_first);
}

TEST_CASE("varadhan_diagnostic: perturbed field agrees with the distance "
          "module at the smallest horizon") {
  auto fields = registry_build("sin-perturbed", {{"eps", 0.1}}, 1);
  auto res = dens::varadhan_diagnostic(scalar(0.0), scalar(0.75), fields,
                                       Hurst(0.5), {0.25, 0.125, 0.0625},
                                       150000, 23, 64);
  REQUIRE(res.rows.back().valid);
  const double limit = res.neg_half_dist_sq;
  CHECK(limit < 0.0);
  const double gap = std::abs(res.rows.back().t2h_log_phat - limit);
  CHECK(gap <= 0.25 * std::abs(limit));
}

TEST_CASE("varadhan_diagnostic: coincident endpoints trend to zero") {
  auto id1 = registry_build("identity", {}, 1);
  auto res = dens::varadhan_diagnostic(scalar(0.0), scalar(0.0), id1,
                                       Hurst(0.5), {0.25, 0.0625}, 40000, 19,
                                       32);
  CHECK(res.neg_half_dist_sq == 0.0);
  CHECK(std::abs(res.rows.back().t2h_log_phat) <
        std::abs(res.rows.front().t2h_log_phat) + 5e-3);
}
