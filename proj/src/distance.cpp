#include "rde/distance.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

namespace rde::dist {

namespace {

constexpr double kMaxGramCondition = 1e12;

// V^T (V V^T)^{-1} (y-x) at one segment point; throws when V V^T is
// numerically singular.
Eigen::VectorXd steering_coefficients(const VectorFieldSet& fields,
                                      const Eigen::VectorXd& z,
                                      const Eigen::VectorXd& dxy) {
  Eigen::MatrixXd v = fields.eval_at(z);
  Eigen::MatrixXd gram = v * v.transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
  const double lo = es.eigenvalues().minCoeff();
  const double hi = es.eigenvalues().maxCoeff();
  if (!(lo > 0.0) || hi / lo > kMaxGramCondition)
    throw NumericalError(
        "connecting_path: V V^T is numerically singular on the segment "
        "(uniform ellipticity violated)");
  const Eigen::VectorXd solved =
      es.eigenvectors() *
      es.eigenvalues().cwiseInverse().asDiagonal() *
      (es.eigenvectors().transpose() * dxy);
  return v.transpose() * solved;
}

}  // namespace

Path connecting_path(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                     const VectorFieldSet& fields, const TimeGrid& grid) {
  if (x.size() != fields.state_dim || y.size() != fields.state_dim)
    throw ValidationError("connecting_path: endpoint dimension mismatch");
  const int n = grid.steps();
  const Eigen::VectorXd dxy = y - x;
  Path h(grid, fields.driving_dim);
  if (dxy.isZero(0.0)) return h;

  Eigen::MatrixXd integrand(n + 1, fields.driving_dim);
  for (int k = 0; k <= n; ++k) {
    const double s = grid.node(k);
    integrand.row(k) =
        steering_coefficients(fields, x + s * dxy, dxy).transpose();
  }
  const double dt = grid.dt();
  for (int k = 1; k <= n; ++k)
    h.values.row(k) = h.values.row(k - 1) +
                      0.5 * dt * (integrand.row(k - 1) + integrand.row(k));
  return h;
}

double distance_upper(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                      const VectorFieldSet& fields, const TimeGrid& grid,
                      const Hurst& h) {
  return cm::cm_norm(connecting_path(x, y, fields, grid), h).value;
}

// ---------------------------------------------------------------------------
// penalty optimizer
// ---------------------------------------------------------------------------

namespace {

// Stacked nodal values (component-major) <-> path with forced zero start.
void unstack(const Eigen::VectorXd& u, Path& h) {
  const int n = h.grid.steps();
  for (int c = 0; c < h.dim(); ++c)
    h.values.col(c).tail(n) = u.segment(c * n, n);
}

struct PenaltyProblem {
  const VectorFieldSet& fields;
  const Eigen::VectorXd& x;
  const Eigen::VectorXd& y;
  const Eigen::MatrixXd& chol;  // Gram factor for the whitening
  TimeGrid grid;
  int dim;
  double fd_step;
  mutable Path hbuf;
  mutable std::int64_t endpoint_solves = 0;

  PenaltyProblem(const VectorFieldSet& f, const Eigen::VectorXd& x0,
                 const Eigen::VectorXd& y0, const Eigen::MatrixXd& l,
                 TimeGrid g, double fd)
      : fields(f), x(x0), y(y0), chol(l), grid(g), dim(f.driving_dim),
        fd_step(fd), hbuf(g, f.driving_dim) {}

  int size() const { return grid.steps() * dim; }

  Eigen::VectorXd to_nodes(const Eigen::VectorXd& w) const {
    const int n = grid.steps();
    Eigen::VectorXd u(size());
    for (int c = 0; c < dim; ++c)
      u.segment(c * n, n).noalias() =
          chol.triangularView<Eigen::Lower>() * w.segment(c * n, n);
    return u;
  }
  Eigen::VectorXd to_white(const Eigen::VectorXd& u) const {
    const int n = grid.steps();
    Eigen::VectorXd w = u;
    for (int c = 0; c < dim; ++c) {
      auto seg = w.segment(c * n, n);
      chol.triangularView<Eigen::Lower>().solveInPlace(seg);
    }
    return w;
  }

  double residual_sq(const Eigen::VectorXd& u) const {
    unstack(u, hbuf);
    ++endpoint_solves;
    return (sde::ito_endpoint(x, hbuf, fields) - y).squaredNorm();
  }

  // F(w) = |w|^2 + rho * r(u(w))
  double value(const Eigen::VectorXd& w, double rho) const {
    return w.squaredNorm() + rho * residual_sq(to_nodes(w));
  }

  // grad F = 2w + rho * L^T grad_u r, with grad_u r by central differences
  // over the nodal parameterization.
  Eigen::VectorXd gradient(const Eigen::VectorXd& w, double rho) const {
    const int n = grid.steps();
    Eigen::VectorXd u = to_nodes(w);
    Eigen::VectorXd gu(size());
    for (int j = 0; j < size(); ++j) {
      const double delta = fd_step * std::max(1.0, std::abs(u(j)));
      const double keep = u(j);
      u(j) = keep + delta;
      const double rp = residual_sq(u);
      u(j) = keep - delta;
      const double rm = residual_sq(u);
      u(j) = keep;
      gu(j) = (rp - rm) / (2.0 * delta);
    }
    Eigen::VectorXd g = 2.0 * w;
    Eigen::VectorXd lifted(n);
    for (int c = 0; c < dim; ++c) {
      lifted.noalias() = chol.transpose().triangularView<Eigen::Upper>() *
                         gu.segment(c * n, n);
      g.segment(c * n, n) += rho * lifted;
    }
    return g;
  }
};

// Barzilai-Borwein descent with nonmonotone backtracking. Returns the
// iteration count.
int bb_descent(const PenaltyProblem& prob, Eigen::VectorXd& w, double rho,
               int max_iters, double grad_tol) {
  Eigen::VectorXd g = prob.gradient(w, rho);
  double f = prob.value(w, rho);
  double step = 1.0 / std::max(1.0, g.norm());
  Eigen::VectorXd w_prev = w, g_prev = g;
  std::vector<double> recent{f};
  int iters = 0;
  for (; iters < max_iters && g.norm() > grad_tol; ++iters) {
    const double f_ref = *std::max_element(recent.begin(), recent.end());
    double alpha = step;
    Eigen::VectorXd w_try;
    double f_try = 0.0;
    bool accepted = false;
    for (int ls = 0; ls < 40; ++ls) {
      w_try = w - alpha * g;
      f_try = prob.value(w_try, rho);
      if (f_try <= f_ref - 1e-4 * alpha * g.squaredNorm()) {
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) break;  // step collapsed below progress threshold

    w_prev.swap(w);
    w = w_try;
    f = f_try;
    recent.push_back(f);
    if (recent.size() > 10) recent.erase(recent.begin());

    g_prev.swap(g);
    g = prob.gradient(w, rho);
    const Eigen::VectorXd s = w - w_prev;
    const Eigen::VectorXd dg = g - g_prev;
    const double sy = s.dot(dg);
    step = sy > 0.0 ? s.squaredNorm() / sy : 1.0 / std::max(1.0, g.norm());
    step = std::clamp(step, 1e-12, 1e6);
  }
  return iters;
}

}  // namespace

DistanceResult distance_optimize(const Eigen::VectorXd& x,
                                 const Eigen::VectorXd& y,
                                 const VectorFieldSet& fields, const Hurst& h,
                                 const OptimizeOptions& opts) {
  DistanceResult res;
  res.x = x;
  res.y = y;
  res.grid_n = opts.grid_n;
  res.hurst = h.value();
  const double dist_euclid = (y - x).norm();

  if (dist_euclid == 0.0) {
    res.converged = true;
    return res;
  }

  const TimeGrid grid(opts.grid_n);
  Path h0 = connecting_path(x, y, fields, grid);
  res.upper_bound = cm::cm_norm(h0, h).value;

  auto gram = cm::shared_gram(grid, h);
  PenaltyProblem prob(fields, x, y, gram->chol, grid, opts.fd_step);

  const int n = grid.steps();
  Eigen::VectorXd u0(prob.size());
  for (int c = 0; c < fields.driving_dim; ++c)
    u0.segment(c * n, n) = h0.values.col(c).tail(n);
  const Eigen::VectorXd w0 = prob.to_white(u0);

  Eigen::VectorXd w = w0;
  int total_iters = 0;
  for (double rho = opts.rho_init; rho <= opts.rho_max * 1.0000001;
       rho *= opts.rho_factor)
    total_iters +=
        bb_descent(prob, w, rho, opts.max_iters_per_stage, opts.grad_tol);

  // the warm start stays a candidate: it is feasible up to solver error,
  // so the reported optimum can never exceed the connecting-path bound
  if (prob.value(w, opts.rho_max) > prob.value(w0, opts.rho_max)) w = w0;

  res.optimized = w.norm();
  res.endpoint_residual = std::sqrt(prob.residual_sq(prob.to_nodes(w)));
  res.ratio = res.optimized / dist_euclid;
  res.iterations = total_iters;
  res.converged = res.endpoint_residual <= opts.endpoint_tol;
  return res;
}

std::vector<SweepCell> comparison_sweep(
    const Eigen::VectorXd& x, const std::vector<double>& radii,
    const std::vector<Eigen::VectorXd>& directions,
    const VectorFieldSet& fields, const Hurst& h, const OptimizeOptions& opts,
    int threads) {
  for (double r : radii)
    if (!(r > 0.0) || r > 1.0)
      throw ValidationError("comparison_sweep: radii must lie in (0,1]");
  for (const auto& u : directions)
    if (std::abs(u.norm() - 1.0) > 1e-8)
      throw ValidationError("comparison_sweep: directions must be unit");

  std::vector<SweepCell> cells(radii.size() * directions.size());
  parallel_for(static_cast<std::int64_t>(cells.size()), threads,
               [&](std::int64_t idx) {
                 const std::size_t ri = idx / directions.size();
                 const std::size_t di = idx % directions.size();
                 SweepCell& cell = cells[idx];
                 cell.radius = radii[ri];
                 cell.dir_index = static_cast<int>(di);
                 cell.result = distance_optimize(
                     x, x + radii[ri] * directions[di], fields, h, opts);
               });
  return cells;
}

void write_sweep_csv(std::ostream& os, const std::vector<SweepCell>& cells) {
  os << "r,dir_index,upper,optimized,residual,ratio,converged\n";
  char buf[192];
  for (const auto& c : cells) {
    std::snprintf(buf, sizeof(buf), "%.17g,%d,%.17g,%.17g,%.17g,%.17g,%d\n",
                  c.radius, c.dir_index, c.result.upper_bound,
                  c.result.optimized, c.result.endpoint_residual,
                  c.result.ratio, c.result.converged ? 1 : 0);
    os << buf;
  }
}

}  // namespace rde::dist
