#pragma once

#include "rde/distance.hpp"
#include "rde/fbm.hpp"
#include "rde/sde.hpp"

namespace rde::dens {

/// Kernel density estimate at a point, with its Monte Carlo error bar and
/// the bandwidths used. The value is a smoothed surrogate for the point
/// density, so the bandwidth is always recorded for audit.
struct DensityEstimate {
  double value = 0.0;
  Eigen::VectorXd bandwidth;
  std::int64_t sample_count = 0;
  double mc_stderr = 0.0;
  double t = 0.0;
  Eigen::VectorXd x, y;
  double hurst = 0.0;
};

/// Endpoints distributed as the solution at time t: fBm paths on [0,1]
/// scaled by t^H and pushed through the flow (the self-similarity of the
/// driver turns the horizon into a noise scale). Returns count x N.
Eigen::MatrixXd sample_endpoints(double t, const Eigen::VectorXd& x,
                                 const VectorFieldSet& fields, const Hurst& h,
                                 std::int64_t count, std::uint64_t seed,
                                 int grid_n = 128, int threads = 1);

/// Product-Gaussian KDE at y with per-dimension Silverman bandwidths
/// (factor * std * count^(-1/(N+4))); the error bar comes from batch means
/// over 10 batches. Needs at least 100 samples and nondegenerate spread in
/// every dimension.
DensityEstimate kde_at(const Eigen::MatrixXd& samples,
                       const Eigen::VectorXd& y);

struct LowerBoundRow {
  double t = 0.0;
  double y_offset = 0.0;           // |y - x| = t^H
  DensityEstimate estimate;
  double scaled = 0.0;             // p_hat * t^{NH}
  double scaled_stderr = 0.0;
};

struct LowerBoundResult {
  std::vector<LowerBoundRow> rows;
  bool positive_at_3se = false;  // min over t of (scaled - 3 se) > 0
  bool stable = false;           // last/first >= 1/2: no decay toward 0
};

/// Small-time lower-bound experiment: for each t place y on the ball
/// boundary y = x + t^H u and track p_hat * t^{NH}. The experiment passes
/// when the scaled values are positive at three error bars and do not
/// decay along the t-list; the bound's constants are existential, so
/// positivity and stability are the certified output.
LowerBoundResult lower_bound_check(const Eigen::VectorXd& x,
                                   const Eigen::VectorXd& u,
                                   const VectorFieldSet& fields,
                                   const Hurst& h,
                                   const std::vector<double>& t_list,
                                   std::int64_t count, std::uint64_t seed,
                                   int grid_n = 128, int threads = 1);

struct VaradhanRow {
  double t = 0.0;
  double phat = 0.0;
  double t2h_log_phat = 0.0;
  bool valid = false;  // false when p_hat <= 0 (logged as missing)
};

struct VaradhanResult {
  std::vector<VaradhanRow> rows;
  double neg_half_dist_sq = 0.0;  // -optimized^2/2 from the distance module
  dist::DistanceResult distance;
};

/// Small-time log-density diagnostic against the squared control distance.
/// Reported without a pass verdict: the KDE bias dominates deep in the
/// tail, so this is a trend indicator, not a test.
VaradhanResult varadhan_diagnostic(const Eigen::VectorXd& x,
                                   const Eigen::VectorXd& y,
                                   const VectorFieldSet& fields,
                                   const Hurst& h,
                                   const std::vector<double>& t_list,
                                   std::int64_t count, std::uint64_t seed,
                                   int grid_n = 128, int threads = 1,
                                   const dist::OptimizeOptions& dopts = {});

/// CSV rows `t,y_offset,phat,stderr,phat_times_tNH,bandwidth`.
void write_lower_bound_csv(std::ostream& os, const LowerBoundResult& result);

void write_varadhan_csv(std::ostream& os, const VaradhanResult& result);

}  // namespace rde::dens
