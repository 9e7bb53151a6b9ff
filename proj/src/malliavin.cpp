#include "rde/malliavin.hpp"

#include "rde/cameron_martin.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

namespace rde::mall {

std::vector<Eigen::MatrixXd> dphi_kernel(const sde::SolveResult& result,
                                         const VectorFieldSet& fields) {
  if (result.jac.empty())
    throw ValidationError("dphi_kernel: solve result carries no Jacobians");
  const int nodes = result.state.grid.nodes();
  const Eigen::MatrixXd& j_end = result.jac.back();
  std::vector<Eigen::MatrixXd> kernel(nodes);
  Eigen::MatrixXd v(fields.state_dim, fields.driving_dim);
  for (int k = 0; k < nodes; ++k) {
    fields.eval(result.state.values.row(k).transpose(), v);
    kernel[k].noalias() = j_end * result.jac_inv[k] * v;
  }
  return kernel;
}

GammaMatrix gamma_young(const sde::SolveResult& result,
                        const VectorFieldSet& fields, const Hurst& h) {
  if (!(h.value() > 0.5))
    throw ValidationError("gamma_young: requires H > 1/2");
  const auto kernel = dphi_kernel(result, fields);
  const int n = result.state.grid.steps();
  const double dt = result.state.grid.dt();
  const double two_h = 2.0 * h.value();
  const double c_h = h.value() * (two_h - 1.0);

  // midpoint values of the smooth factor
  std::vector<Eigen::MatrixXd> mid(n);
  for (int p = 0; p < n; ++p) mid[p] = 0.5 * (kernel[p] + kernel[p + 1]);

  // exact integrals of |t-s|^{2H-2} over cell pairs depend only on the lag
  std::vector<double> weight(n);
  {
    // lag 0: 2 dt^{2H} / (2H(2H-1))
    weight[0] = 2.0 * std::pow(dt, two_h) / (two_h * (two_h - 1.0));
    auto f = [two_h](double u) { return std::pow(u, two_h); };
    for (int lag = 1; lag < n; ++lag) {
      const double a = (lag - 1) * dt, b = lag * dt, c = (lag + 1) * dt;
      weight[lag] =
          (f(c) - 2.0 * f(b) + f(a)) / (two_h * (two_h - 1.0));
    }
  }

  GammaMatrix g;
  g.hurst = h.value();
  g.regime = "double-integral";
  g.matrix = Eigen::MatrixXd::Zero(fields.state_dim, fields.state_dim);
  Eigen::MatrixXd acc(fields.state_dim, fields.state_dim);
  for (int p = 0; p < n; ++p) {
    g.matrix.noalias() += weight[0] * mid[p] * mid[p].transpose();
    for (int q = p + 1; q < n; ++q) {
      acc.noalias() = mid[p] * mid[q].transpose();
      g.matrix.noalias() += weight[q - p] * (acc + acc.transpose());
    }
  }
  g.matrix *= c_h;
  g.det = g.matrix.determinant();
  return g;
}

GammaMatrix gamma_l2_bound(const sde::SolveResult& result,
                           const VectorFieldSet& fields, const Hurst& h) {
  if (h.value() > 0.5)
    throw ValidationError("gamma_l2_bound: requires H <= 1/2");
  const auto kernel = dphi_kernel(result, fields);
  const int n = result.state.grid.steps();
  const double dt = result.state.grid.dt();
  GammaMatrix g;
  g.hurst = h.value();
  g.regime = "l2-lower-bound";
  g.matrix = Eigen::MatrixXd::Zero(fields.state_dim, fields.state_dim);
  for (int k = 0; k <= n; ++k) {
    const double w = (k == 0 || k == n) ? 0.5 * dt : dt;
    g.matrix.noalias() += w * kernel[k] * kernel[k].transpose();
  }
  g.det = g.matrix.determinant();
  return g;
}

GammaMatrix gamma_for_regime(const sde::SolveResult& result,
                             const VectorFieldSet& fields, const Hurst& h) {
  return h.value() > 0.5 ? gamma_young(result, fields, h)
                         : gamma_l2_bound(result, fields, h);
}

ScanResult nondegeneracy_scan(const Eigen::VectorXd& x,
                              const VectorFieldSet& fields, const Hurst& h,
                              double m_bound, int count, std::uint64_t seed,
                              int grid_n, int threads) {
  if (count <= 0)
    throw ValidationError("nondegeneracy_scan: empty scan (count must be > 0)");
  if (!(m_bound > 0.0))
    throw ValidationError("nondegeneracy_scan: norm bound M must be > 0");
  const TimeGrid grid(grid_n);
  cm::shared_gram(grid, h);  // factorize once before the parallel section

  ScanResult scan;
  scan.records.resize(count);
  parallel_for(count, threads, [&](std::int64_t i) {
    RngStream rng(seed, RngStream::derive(7, i));
    Path path = random_smooth_path(grid, fields.driving_dim, rng);
    const double raw_norm = cm::cm_norm(path, h).value;
    const double target = rng.uniform() * m_bound;
    path.values *= raw_norm > 0.0 ? target / raw_norm : 0.0;

    auto solved = sde::ito_map(x, path, fields);
    GammaMatrix g = gamma_for_regime(solved, fields, h);
    scan.records[i] = {static_cast<int>(i), target, g.det, g.regime, true};
  });

  bool first = true;
  for (const auto& rec : scan.records) {
    if (!rec.converged) {
      ++scan.excluded;
      continue;
    }
    if (first || rec.det < scan.det_min) scan.det_min = rec.det;
    if (first || rec.det > scan.det_max) scan.det_max = rec.det;
    first = false;
  }
  return scan;
}

void write_scan_csv(std::ostream& os, const ScanResult& scan) {
  os << "iter,h_norm,det,regime,converged\n";
  char buf[128];
  for (const auto& r : scan.records) {
    std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g,%s,%d\n", r.iter, r.h_norm,
                  r.det, r.regime.c_str(), r.converged ? 1 : 0);
    os << buf;
  }
}

}  // namespace rde::mall
