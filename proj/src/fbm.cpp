#include "rde/fbm.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <cstdio>
#include <ostream>

namespace rde::fbm {

double cov(double s, double t, const Hurst& h) {
  const double two_h = 2.0 * h.value();
  return 0.5 * (std::pow(s, two_h) + std::pow(t, two_h) -
                std::pow(std::abs(s - t), two_h));
}

CovGram gram(const TimeGrid& grid, const Hurst& h) {
  const int n = grid.steps();
  Eigen::MatrixXd r(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j <= i; ++j) {
      const double v = cov(grid.node(i + 1), grid.node(j + 1), h);
      r(i, j) = v;
      r(j, i) = v;
    }

  static constexpr double kJitterLadder[] = {0.0, 1e-12, 1e-10};
  for (double jitter : kJitterLadder) {
    Eigen::MatrixXd attempt = r;
    if (jitter > 0.0) attempt.diagonal().array() += jitter;
    Eigen::LLT<Eigen::MatrixXd> llt(attempt);
    if (llt.info() == Eigen::Success) {
      CovGram out{grid, h, std::move(r), llt.matrixL(), jitter};
      return out;
    }
  }
  throw NumericalError(
      "fbm gram: factorization failed at maximum jitter (grid too fine or "
      "Hurst index too extreme)");
}

PathSampler::PathSampler(const TimeGrid& grid, const Hurst& h, int dim,
                         std::uint64_t seed, std::uint64_t stream)
    : gram_(rde::fbm::gram(grid, h)), dim_(dim), seed_(seed),
      stream_(stream) {
  if (dim < 1) throw ValidationError("fbm sampler: dim must be >= 1");
}

void PathSampler::path(std::int64_t index,
                       Eigen::Ref<Eigen::MatrixXd> out) const {
  const int n = gram_.grid.steps();
  RngStream rng(seed_, RngStream::derive(stream_, index));
  Eigen::VectorXd xi(n);
  out.row(0).setZero();
  for (int c = 0; c < dim_; ++c) {
    for (int i = 0; i < n; ++i) xi(i) = rng.normal();
    out.col(c).tail(n).noalias() =
        gram_.chol.triangularView<Eigen::Lower>() * xi;
  }
}

Path PathSampler::path(std::int64_t index) const {
  Path p(gram_.grid, dim_);
  path(index, p.values);
  return p;
}

std::vector<Path> sample_paths(const TimeGrid& grid, const Hurst& h, int dim,
                               std::int64_t count, std::uint64_t seed,
                               std::uint64_t stream, int threads) {
  PathSampler sampler(grid, h, dim, seed, stream);
  std::vector<Path> out(count, Path(grid, dim));
  parallel_for(count, threads,
               [&](std::int64_t i) { sampler.path(i, out[i].values); });
  return out;
}

void write_path_csv(std::ostream& os, const Path& p) {
  os << "t";
  for (int c = 1; c <= p.dim(); ++c) os << ",comp_" << c;
  os << "\n";
  char buf[32];
  for (int k = 0; k < p.grid.nodes(); ++k) {
    std::snprintf(buf, sizeof(buf), "%.17g", p.grid.node(k));
    os << buf;
    for (int c = 0; c < p.dim(); ++c) {
      std::snprintf(buf, sizeof(buf), "%.17g", p.values(k, c));
      os << ',' << buf;
    }
    os << "\n";
  }
}

}  // namespace rde::fbm
