#pragma once

#include "rde/core.hpp"

#include <iosfwd>

namespace rde::fbm {

/// Covariance of fractional Brownian motion,
///   R(s,t) = (s^2H + t^2H - |s-t|^2H) / 2.
/// Total on [0,1]^2 and symmetric; reduces to min(s,t) at H = 1/2.
double cov(double s, double t, const Hurst& h);

/// Gram matrix of the process over the interior+terminal nodes t_1..t_n
/// together with its lower Cholesky factor. Node t_0 is excluded (its row
/// is identically zero); samplers prepend the forced value B_0 = 0.
/// The factor L is the discrete Volterra kernel of the process: it is
/// lower triangular (causal) and L L^T reproduces R.
struct CovGram {
  TimeGrid grid;
  Hurst hurst;
  Eigen::MatrixXd matrix;  // n x n, R(t_i, t_j), 1-based nodes
  Eigen::MatrixXd chol;    // lower triangular, L L^T = matrix + jitter*I
  double jitter_used = 0.0;
};

/// Factorizes the Gram, escalating jitter through {0, 1e-12, 1e-10} and
/// failing with NumericalError if none succeeds.
CovGram gram(const TimeGrid& grid, const Hurst& h);

/// Exact-covariance fBm sampler: one column of L * xi per component, xi
/// i.i.d. standard normal. Path i is a pure function of (seed, stream, i),
/// so batches may be generated in any order or in parallel.
class PathSampler {
 public:
  PathSampler(const TimeGrid& grid, const Hurst& h, int dim,
              std::uint64_t seed, std::uint64_t stream);

  /// Fills `out` (shape nodes x dim) with path `index`; row 0 is zero.
  void path(std::int64_t index, Eigen::Ref<Eigen::MatrixXd> out) const;

  Path path(std::int64_t index) const;

  const CovGram& gram() const { return gram_; }

 private:
  CovGram gram_;
  int dim_;
  std::uint64_t seed_, stream_;
};

/// Materializes `count` i.i.d. d-dimensional paths (components independent,
/// exact joint covariance per component in distribution).
std::vector<Path> sample_paths(const TimeGrid& grid, const Hurst& h, int dim,
                               std::int64_t count, std::uint64_t seed,
                               std::uint64_t stream, int threads = 1);

/// CSV export: header `t,comp_1..comp_d`, one row per node, %.17g.
void write_path_csv(std::ostream& os, const Path& p);

}  // namespace rde::fbm
