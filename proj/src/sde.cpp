#include "rde/sde.hpp"

#include <cmath>

namespace rde::sde {

namespace {

void check_compat(const Eigen::VectorXd& x, const Path& driver,
                  const VectorFieldSet& fields, const char* op) {
  if (x.size() != fields.state_dim)
    throw ValidationError(std::string(op) + ": initial point has dimension " +
                          std::to_string(x.size()) + ", fields expect " +
                          std::to_string(fields.state_dim));
  if (driver.dim() != fields.driving_dim)
    throw ValidationError(std::string(op) +
                          ": driver dimension does not match driving_dim");
}

void check_hurst_range(const Hurst& h) {
  if (!(h.value() > 1.0 / 3.0))
    throw CapabilityError(
        "solve_sde: increment-only schemes support H > 1/3; H <= 1/3 needs "
        "Levy-area information and is out of range");
}

// A(x, w)_{ac} = sum_i dV_{a,i}/dx_c * w_i, assembled from the N x (d*N)
// Jacobian block layout.
void contract_jac(const Eigen::MatrixXd& jac, const Eigen::VectorXd& w,
                  Eigen::MatrixXd& a) {
  const int n = static_cast<int>(a.rows());
  const int d = static_cast<int>(w.size());
  a.setZero();
  for (int i = 0; i < d; ++i) a.noalias() += w(i) * jac.middleCols(i * n, n);
}

struct StepWorkspace {
  Eigen::MatrixXd v, jac, a, m, minv, tmp;
  Eigen::VectorXd u, db, drift_val;
  explicit StepWorkspace(int n, int d)
      : v(n, d), jac(n, d * n), a(n, n), m(n, n), minv(n, n), tmp(n, n),
        u(n), db(d), drift_val(n) {}
};

}  // namespace

std::string scheme_name(Scheme s) {
  switch (s) {
    case Scheme::YoungEuler: return "young-euler";
    case Scheme::MilsteinIncrement: return "milstein-increment";
    case Scheme::OdeRk4: return "ode-rk4";
  }
  return "?";
}

double SolveResult::jacobian_defect() const {
  if (jac.empty()) return 0.0;
  double worst = 0.0;
  const int n = static_cast<int>(jac.size());
  const Eigen::MatrixXd eye =
      Eigen::MatrixXd::Identity(jac[0].rows(), jac[0].cols());
  for (int k = 0; k < n; ++k)
    worst = std::max(worst,
                     (jac[k] * jac_inv[k] - eye).cwiseAbs().maxCoeff());
  return worst;
}

// ---------------------------------------------------------------------------
// Ito map: cell-level RK4 on dX = V(X) v dt with v constant per cell,
// variational equations dJ = A(X) J dt and dJ^{-1} = -J^{-1} A(X) dt.
// ---------------------------------------------------------------------------

namespace {

struct Rk4Workspace {
  Eigen::MatrixXd v, jacm, a1, a2, a3, a4;
  Eigen::VectorXd k1, k2, k3, k4, xs;
  Eigen::MatrixXd kj1, kj2, kj3, kj4, js;
  explicit Rk4Workspace(int n, int d)
      : v(n, d), jacm(n, d * n), a1(n, n), a2(n, n), a3(n, n), a4(n, n),
        k1(n), k2(n), k3(n), k4(n), xs(n),
        kj1(n, n), kj2(n, n), kj3(n, n), kj4(n, n), js(n, n) {}
};

// one RK4 stage: fills ki = V(xs) v and ai = A(xs, v)
void rk4_stage(const VectorFieldSet& fields, const Eigen::VectorXd& xs,
               const Eigen::VectorXd& vcell, Rk4Workspace& w,
               Eigen::VectorXd& ki, Eigen::MatrixXd& ai, bool with_jac) {
  fields.eval(xs, w.v);
  ki.noalias() = w.v * vcell;
  if (with_jac) {
    fields.jac(xs, w.jacm);
    contract_jac(w.jacm, vcell, ai);
  }
}

template <bool WithJac>
SolveResult ito_map_impl(const Eigen::VectorXd& x, const Path& h,
                         const VectorFieldSet& fields) {
  check_compat(x, h, fields, "ito_map");
  const int n = h.grid.steps();
  const int nn = fields.state_dim;
  const double dt = h.grid.dt();
  Rk4Workspace w(nn, fields.driving_dim);

  SolveResult out{Path(h.grid, nn), {}, {}, Scheme::OdeRk4};
  Eigen::VectorXd xs = x;
  out.state.values.row(0) = x.transpose();
  Eigen::MatrixXd jac, jinv;
  if constexpr (WithJac) {
    jac = Eigen::MatrixXd::Identity(nn, nn);
    jinv = jac;
    out.jac.assign(n + 1, jac);
    out.jac_inv.assign(n + 1, jinv);
  }

  Eigen::VectorXd vcell(fields.driving_dim);
  for (int k = 0; k < n; ++k) {
    vcell = (h.values.row(k + 1) - h.values.row(k)).transpose() / dt;

    rk4_stage(fields, xs, vcell, w, w.k1, w.a1, WithJac);
    w.xs = xs + 0.5 * dt * w.k1;
    rk4_stage(fields, w.xs, vcell, w, w.k2, w.a2, WithJac);
    w.xs = xs + 0.5 * dt * w.k2;
    rk4_stage(fields, w.xs, vcell, w, w.k3, w.a3, WithJac);
    w.xs = xs + dt * w.k3;
    rk4_stage(fields, w.xs, vcell, w, w.k4, w.a4, WithJac);

    xs += dt / 6.0 * (w.k1 + 2.0 * w.k2 + 2.0 * w.k3 + w.k4);
    out.state.values.row(k + 1) = xs.transpose();

    if constexpr (WithJac) {
      w.kj1.noalias() = w.a1 * jac;
      w.js = jac + 0.5 * dt * w.kj1;
      w.kj2.noalias() = w.a2 * w.js;
      w.js = jac + 0.5 * dt * w.kj2;
      w.kj3.noalias() = w.a3 * w.js;
      w.js = jac + dt * w.kj3;
      w.kj4.noalias() = w.a4 * w.js;
      jac += dt / 6.0 * (w.kj1 + 2.0 * w.kj2 + 2.0 * w.kj3 + w.kj4);

      w.kj1.noalias() = -jinv * w.a1;
      w.js = jinv + 0.5 * dt * w.kj1;
      w.kj2.noalias() = -w.js * w.a2;
      w.js = jinv + 0.5 * dt * w.kj2;
      w.kj3.noalias() = -w.js * w.a3;
      w.js = jinv + dt * w.kj3;
      w.kj4.noalias() = -w.js * w.a4;
      jinv += dt / 6.0 * (w.kj1 + 2.0 * w.kj2 + 2.0 * w.kj3 + w.kj4);

      out.jac[k + 1] = jac;
      out.jac_inv[k + 1] = jinv;
    }
  }
  return out;
}

}  // namespace

SolveResult ito_map(const Eigen::VectorXd& x, const Path& h,
                    const VectorFieldSet& fields) {
  return ito_map_impl<true>(x, h, fields);
}

Eigen::VectorXd ito_endpoint(const Eigen::VectorXd& x, const Path& h,
                             const VectorFieldSet& fields) {
  return ito_map_impl<false>(x, h, fields).endpoint();
}

// ---------------------------------------------------------------------------
// fBm-driven solves
// ---------------------------------------------------------------------------

namespace {

template <bool WithJac>
SolveResult solve_impl(const Eigen::VectorXd& x, const Path& b,
                       const VectorFieldSet& fields, const Hurst& h,
                       double drift_scale, const SolveOptions& opts) {
  check_compat(x, b, fields, "solve_sde");
  check_hurst_range(h);
  const Scheme scheme =
      opts.scheme_override.value_or(Scheme::MilsteinIncrement);
  if (scheme == Scheme::OdeRk4)
    throw ValidationError("solve_sde: ode-rk4 is the ito_map scheme");
  const bool milstein = scheme == Scheme::MilsteinIncrement;

  const int n = b.grid.steps();
  const int nn = fields.state_dim;
  const double dt = b.grid.dt();
  const bool with_drift = drift_scale != 0.0 && fields.has_drift();
  StepWorkspace w(nn, fields.driving_dim);

  SolveResult out{Path(b.grid, nn), {}, {}, scheme};
  Eigen::VectorXd xs = x;
  out.state.values.row(0) = x.transpose();
  Eigen::MatrixXd jac, jinv;
  if constexpr (WithJac) {
    jac = Eigen::MatrixXd::Identity(nn, nn);
    jinv = jac;
    out.jac.assign(n + 1, jac);
    out.jac_inv.assign(n + 1, jinv);
  }

  for (int k = 0; k < n; ++k) {
    // all field evaluations happen at the pre-step state
    w.db = (b.values.row(k + 1) - b.values.row(k)).transpose();
    fields.eval(xs, w.v);
    fields.jac(xs, w.jac);
    w.u.noalias() = w.v * w.db;
    contract_jac(w.jac, w.db, w.a);
    if (with_drift) fields.drift(xs, w.drift_val);

    if constexpr (WithJac) {
      w.m = Eigen::MatrixXd::Identity(nn, nn) + w.a;
      if (milstein) w.m.noalias() += 0.5 * w.a * w.a;
      if (with_drift && fields.drift_jac) {
        fields.drift_jac(xs, w.tmp);
        w.m.noalias() += (drift_scale * dt) * w.tmp;
      }
      w.tmp.noalias() = w.m * jac;
      jac = w.tmp;
      w.minv = w.m.inverse();
      w.tmp.noalias() = jinv * w.minv;
      jinv = w.tmp;
      out.jac[k + 1] = jac;
      out.jac_inv[k + 1] = jinv;
    }

    if (milstein) xs.noalias() += 0.5 * w.a * w.u;
    xs += w.u;
    if (with_drift) xs += (drift_scale * dt) * w.drift_val;
    out.state.values.row(k + 1) = xs.transpose();
  }
  return out;
}

}  // namespace

SolveResult solve_sde(const Eigen::VectorXd& x, const Path& b,
                      const VectorFieldSet& fields, const Hurst& h,
                      const SolveOptions& opts) {
  return solve_impl<true>(x, b, fields, h, 0.0, opts);
}

SolveResult solve_sde_drift(const Eigen::VectorXd& x, const Path& b,
                            const VectorFieldSet& fields, const Hurst& h,
                            double eps, const SolveOptions& opts) {
  if (eps < 0.0) throw ValidationError("solve_sde_drift: eps must be >= 0");
  const double scale = std::pow(eps, 1.0 / h.value());
  return solve_impl<true>(x, b, fields, h, scale, opts);
}

Eigen::VectorXd solve_endpoint(const Eigen::VectorXd& x, const Path& b,
                               const VectorFieldSet& fields, const Hurst& h,
                               const SolveOptions& opts) {
  return solve_impl<false>(x, b, fields, h, 0.0, opts).endpoint();
}

}  // namespace rde::sde
