#include <doctest.h>

#include "rde/fbm.hpp"

#include <cmath>
#include <sstream>

using namespace rde;

TEST_CASE("cov closed-form values") {
  CHECK(fbm::cov(1.0, 1.0, Hurst(0.3)) == doctest::Approx(1.0));
  CHECK(fbm::cov(1.0, 1.0, Hurst(0.8)) == doctest::Approx(1.0));
  CHECK(fbm::cov(0.3, 0.7, Hurst(0.5)) == doctest::Approx(0.3));
  CHECK(fbm::cov(0.5, 0.5, Hurst(0.25)) ==
        doctest::Approx(std::pow(0.5, 0.5)));
}

TEST_CASE("cov is symmetric; Brownian case is min(s,t)") {
  for (double hv : {0.35, 0.5, 0.8}) {
    const Hurst h(hv);
    for (double s : {0.1, 0.4, 0.9})
      for (double t : {0.2, 0.5, 1.0}) {
        CHECK(fbm::cov(s, t, h) == doctest::Approx(fbm::cov(t, s, h)));
        if (hv == 0.5)
          CHECK(fbm::cov(s, t, h) == doctest::Approx(std::min(s, t)));
      }
  }
}

TEST_CASE("gram at tiny sizes matches hand values") {
  auto g1 = fbm::gram(make_grid(1), Hurst(0.5));
  CHECK(g1.matrix(0, 0) == doctest::Approx(1.0));
  CHECK(g1.chol(0, 0) == doctest::Approx(1.0));

  auto g2 = fbm::gram(make_grid(2), Hurst(0.5));
  CHECK(g2.matrix(0, 0) == doctest::Approx(0.5));
  CHECK(g2.matrix(0, 1) == doctest::Approx(0.5));
  CHECK(g2.matrix(1, 1) == doctest::Approx(1.0));
}

TEST_CASE("gram factor reproduces the matrix and is causal") {
  auto g = fbm::gram(make_grid(16), Hurst(0.75));
  const Eigen::MatrixXd recon = g.chol * g.chol.transpose();
  CHECK((recon - g.matrix).cwiseAbs().maxCoeff() <= g.jitter_used + 1e-10);
  CHECK(g.jitter_used == 0.0);
  for (int i = 0; i < 16; ++i)
    for (int j = i + 1; j < 16; ++j) CHECK(g.chol(i, j) == 0.0);
}

TEST_CASE("gram factorizes without jitter across the full index range") {
  for (double hv : {0.05, 0.35, 0.75, 0.99}) {
    auto g = fbm::gram(make_grid(256), Hurst(hv));
    CHECK(g.jitter_used == 0.0);
    const Eigen::MatrixXd recon = g.chol * g.chol.transpose();
    CHECK((recon - g.matrix).cwiseAbs().maxCoeff() <=
          g.jitter_used + 1e-10);
  }
}

TEST_CASE("sampled covariance matches the kernel within Monte Carlo error") {
  const int n = 8;
  const std::int64_t count = 100000;
  for (double hv : {0.5, 0.75}) {
    const Hurst h(hv);
    fbm::PathSampler sampler(make_grid(n), h, 1, 2024, 5);
    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(n, n);
    Eigen::MatrixXd b(n + 1, 1);
    for (std::int64_t i = 0; i < count; ++i) {
      sampler.path(i, b);
      acc.selfadjointView<Eigen::Lower>().rankUpdate(b.col(0).tail(n), 1.0);
    }
    acc /= static_cast<double>(count);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j <= i; ++j) {
        const double exact = sampler.gram().matrix(i, j);
        const double mcse = std::sqrt((sampler.gram().matrix(i, i) *
                                           sampler.gram().matrix(j, j) +
                                       exact * exact) /
                                      count);
        CHECK(std::abs(acc(i, j) - exact) <= 3.5 * mcse);
      }
  }
}

TEST_CASE("components are independent and start at zero") {
  fbm::PathSampler sampler(make_grid(8), Hurst(0.4), 3, 7, 1);
  const std::int64_t count = 50000;
  double cross = 0.0, var0 = 0.0, var1 = 0.0;
  Eigen::MatrixXd b(9, 3);
  for (std::int64_t i = 0; i < count; ++i) {
    sampler.path(i, b);
    CHECK(b.row(0).cwiseAbs().maxCoeff() == 0.0);
    cross += b(8, 0) * b(8, 1);
    var0 += b(8, 0) * b(8, 0);
    var1 += b(8, 1) * b(8, 1);
  }
  cross /= count;
  var0 /= count;
  var1 /= count;
  CHECK(var0 == doctest::Approx(1.0).epsilon(0.03));
  CHECK(var1 == doctest::Approx(1.0).epsilon(0.03));
  CHECK(std::abs(cross) <= 3.0 / std::sqrt(static_cast<double>(count)));
}

TEST_CASE("sample_paths is deterministic and batch-order independent") {
  auto a = fbm::sample_paths(make_grid(16), Hurst(0.6), 2, 10, 99, 3, 1);
  auto b = fbm::sample_paths(make_grid(16), Hurst(0.6), 2, 10, 99, 3, 4);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    CHECK(a[i].values == b[i].values);
}

TEST_CASE("path csv format") {
  Path p(make_grid(2), 2);
  p.values << 0, 0, 0.5, -1, 1, 2;
  std::ostringstream os;
  fbm::write_path_csv(os, p);
  CHECK(os.str() ==
        "t,comp_1,comp_2\n0,0,0\n0.5,0.5,-1\n1,1,2\n");
}
