#pragma once

#include "rde/cameron_martin.hpp"
#include "rde/sde.hpp"

namespace rde::dist {

/// Certified output of one distance computation. `optimized` is an upper
/// bound on the control distance with `endpoint_residual` as its
/// feasibility certificate; `upper_bound` is the norm of the explicit
/// connecting path, which dominates it.
struct DistanceResult {
  Eigen::VectorXd x, y;
  double upper_bound = 0.0;
  double optimized = 0.0;
  double endpoint_residual = 0.0;
  double ratio = 0.0;  // optimized / |x-y|
  int grid_n = 0;
  double hurst = 0.0;
  bool converged = false;
  int iterations = 0;
};

/// Explicit path steering x to y through the flow: the cumulative
/// trapezoid of V^T (V V^T)^{-1} (y-x) along the straight segment from x
/// to y. Rejects fields whose Gram V V^T is numerically singular
/// (condition number above 1e12) on the segment.
Path connecting_path(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                     const VectorFieldSet& fields, const TimeGrid& grid);

/// RKHS norm of the connecting path: an upper bound for the control
/// distance by definition of the infimum.
double distance_upper(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                      const VectorFieldSet& fields, const TimeGrid& grid,
                      const Hurst& h);

struct OptimizeOptions {
  int grid_n = 64;
  double rho_init = 1e2;
  double rho_max = 1e7;
  double rho_factor = 10.0;
  int max_iters_per_stage = 500;
  double grad_tol = 1e-6;
  double fd_step = 1e-6;
  double endpoint_tol = 1e-6;  // converged-flag threshold on |Phi_1 - y|
};

/// Quadratic-penalty minimization of the RKHS energy subject to the
/// endpoint constraint Phi_1(x;h) = y, warm-started from the connecting
/// path. The penalty weight escalates rho_init -> rho_max; gradients of
/// the endpoint term are central finite differences over the nodal values
/// of h. A result whose residual exceeds endpoint_tol is reported with
/// converged = false rather than suppressed.
DistanceResult distance_optimize(const Eigen::VectorXd& x,
                                 const Eigen::VectorXd& y,
                                 const VectorFieldSet& fields, const Hurst& h,
                                 const OptimizeOptions& opts = {});

struct SweepCell {
  double radius = 0.0;
  int dir_index = 0;
  DistanceResult result;
};

/// Distance-vs-Euclidean comparison over y = x + r u for every radius r
/// and unit direction u. Cells are independent and run in parallel;
/// output order is (radius, direction).
std::vector<SweepCell> comparison_sweep(
    const Eigen::VectorXd& x, const std::vector<double>& radii,
    const std::vector<Eigen::VectorXd>& directions,
    const VectorFieldSet& fields, const Hurst& h,
    const OptimizeOptions& opts = {}, int threads = 1);

/// CSV rows `r,dir_index,upper,optimized,residual,ratio,converged`.
void write_sweep_csv(std::ostream& os, const std::vector<SweepCell>& cells);

}  // namespace rde::dist
