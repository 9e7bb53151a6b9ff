#include "rde/density.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

namespace rde::dens {

Eigen::MatrixXd sample_endpoints(double t, const Eigen::VectorXd& x,
                                 const VectorFieldSet& fields, const Hurst& h,
                                 std::int64_t count, std::uint64_t seed,
                                 int grid_n, int threads) {
  if (!(t > 0.0) || t > 1.0)
    throw ValidationError("sample_endpoints: t must lie in (0,1]");
  Eigen::MatrixXd endpoints(count, fields.state_dim);
  if (count == 0) return endpoints;

  const TimeGrid grid(grid_n);
  fbm::PathSampler sampler(grid, h, fields.driving_dim, seed, 1);
  const double scale = std::pow(t, h.value());

  parallel_for(count, threads, [&](std::int64_t i) {
    Path b(grid, fields.driving_dim);
    sampler.path(i, b.values);
    b.values *= scale;
    endpoints.row(i) = sde::solve_endpoint(x, b, fields, h).transpose();
  });
  return endpoints;
}

DensityEstimate kde_at(const Eigen::MatrixXd& samples,
                       const Eigen::VectorXd& y) {
  const std::int64_t count = samples.rows();
  const int dim = static_cast<int>(samples.cols());
  if (count < 100)
    throw ValidationError("kde_at: at least 100 samples required");
  if (y.size() != dim) throw ValidationError("kde_at: dimension mismatch");

  DensityEstimate est;
  est.sample_count = count;
  est.y = y;
  est.bandwidth.resize(dim);
  const Eigen::VectorXd mean = samples.colwise().mean();
  const double silverman =
      std::pow(4.0 / (dim + 2.0), 1.0 / (dim + 4.0)) *
      std::pow(static_cast<double>(count), -1.0 / (dim + 4.0));
  for (int c = 0; c < dim; ++c) {
    const double var =
        (samples.col(c).array() - mean(c)).square().sum() / (count - 1);
    if (!(var > 0.0))
      throw ValidationError(
          "kde_at: degenerate samples (zero variance in a dimension)");
    est.bandwidth(c) = silverman * std::sqrt(var);
  }

  const double norm_const =
      std::pow(2.0 * M_PI, -0.5 * dim) / est.bandwidth.prod();
  constexpr int kBatches = 10;
  double batch_mean[kBatches];
  double total = 0.0;
  for (int bi = 0; bi < kBatches; ++bi) {
    const std::int64_t lo = bi * count / kBatches;
    const std::int64_t hi = (bi + 1) * count / kBatches;
    double acc = 0.0;
    for (std::int64_t i = lo; i < hi; ++i) {
      double e = 0.0;
      for (int c = 0; c < dim; ++c) {
        const double z = (y(c) - samples(i, c)) / est.bandwidth(c);
        e += z * z;
      }
      acc += std::exp(-0.5 * e);
    }
    total += acc;
    batch_mean[bi] = norm_const * acc / static_cast<double>(hi - lo);
  }
  est.value = norm_const * total / static_cast<double>(count);

  double bsum = 0.0;
  for (double b : batch_mean) bsum += b;
  const double bavg = bsum / kBatches;
  double bvar = 0.0;
  for (double b : batch_mean) bvar += (b - bavg) * (b - bavg);
  bvar /= (kBatches - 1);
  est.mc_stderr = std::sqrt(bvar / kBatches);
  return est;
}

LowerBoundResult lower_bound_check(const Eigen::VectorXd& x,
                                   const Eigen::VectorXd& u,
                                   const VectorFieldSet& fields,
                                   const Hurst& h,
                                   const std::vector<double>& t_list,
                                   std::int64_t count, std::uint64_t seed,
                                   int grid_n, int threads) {
  if (std::abs(u.norm() - 1.0) > 1e-8)
    throw ValidationError("lower_bound_check: direction must be unit");
  LowerBoundResult out;
  const double nh = fields.state_dim * h.value();
  for (double t : t_list) {
    LowerBoundRow row;
    row.t = t;
    row.y_offset = std::pow(t, h.value());
    const Eigen::VectorXd y = x + row.y_offset * u;
    Eigen::MatrixXd samples =
        sample_endpoints(t, x, fields, h, count, seed, grid_n, threads);
    row.estimate = kde_at(samples, y);
    row.estimate.t = t;
    row.estimate.x = x;
    row.estimate.hurst = h.value();
    const double scale_t = std::pow(t, nh);
    row.scaled = row.estimate.value * scale_t;
    row.scaled_stderr = row.estimate.mc_stderr * scale_t;
    out.rows.push_back(std::move(row));
  }
  if (!out.rows.empty()) {
    out.positive_at_3se = true;
    for (const auto& r : out.rows)
      if (!(r.scaled - 3.0 * r.scaled_stderr > 0.0)) out.positive_at_3se = false;
    out.stable = out.rows.back().scaled >= 0.5 * out.rows.front().scaled;
  }
  return out;
}

VaradhanResult varadhan_diagnostic(const Eigen::VectorXd& x,
                                   const Eigen::VectorXd& y,
                                   const VectorFieldSet& fields,
                                   const Hurst& h,
                                   const std::vector<double>& t_list,
                                   std::int64_t count, std::uint64_t seed,
                                   int grid_n, int threads,
                                   const dist::OptimizeOptions& dopts) {
  VaradhanResult out;
  out.distance = dist::distance_optimize(x, y, fields, h, dopts);
  out.neg_half_dist_sq =
      -0.5 * out.distance.optimized * out.distance.optimized;
  const double two_h = 2.0 * h.value();
  for (double t : t_list) {
    VaradhanRow row;
    row.t = t;
    Eigen::MatrixXd samples =
        sample_endpoints(t, x, fields, h, count, seed, grid_n, threads);
    row.phat = kde_at(samples, y).value;
    row.valid = row.phat > 0.0;
    row.t2h_log_phat =
        row.valid ? std::pow(t, two_h) * std::log(row.phat) : 0.0;
    out.rows.push_back(row);
  }
  return out;
}

void write_lower_bound_csv(std::ostream& os, const LowerBoundResult& result) {
  os << "t,y_offset,phat,stderr,phat_times_tNH,bandwidth\n";
  char buf[256];
  for (const auto& r : result.rows) {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g,%.17g,", r.t,
                  r.y_offset, r.estimate.value, r.estimate.mc_stderr,
                  r.scaled);
    os << buf;
    for (int c = 0; c < r.estimate.bandwidth.size(); ++c) {
      std::snprintf(buf, sizeof(buf), "%.17g", r.estimate.bandwidth(c));
      os << (c ? ";" : "") << buf;
    }
    os << "\n";
  }
}

void write_varadhan_csv(std::ostream& os, const VaradhanResult& result) {
  os << "t,phat,t2H_log_phat,neg_half_dist_sq,valid\n";
  char buf[192];
  for (const auto& r : result.rows) {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g,%d\n", r.t,
                  r.phat, r.t2h_log_phat, result.neg_half_dist_sq,
                  r.valid ? 1 : 0);
    os << buf;
  }
}

}  // namespace rde::dens
