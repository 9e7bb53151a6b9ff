#include "rde/cameron_martin.hpp"

#include "rde/fraccalc.hpp"

#include <cmath>
#include <cstring>
#include <map>
#include <mutex>

namespace rde::cm {

namespace {

constexpr int kReferenceGridN = 256;

// ---------------------------------------------------------------------------
// caches
// ---------------------------------------------------------------------------

std::uint64_t hurst_key(const Hurst& h) {
  std::uint64_t k;
  const double v = h.value();
  static_assert(sizeof(k) == sizeof(v));
  std::memcpy(&k, &v, sizeof(k));
  return k;
}

std::mutex g_gram_mutex;
std::map<std::pair<int, std::uint64_t>, std::shared_ptr<const fbm::CovGram>>
    g_gram_cache;

std::mutex g_calib_mutex;
std::map<std::uint64_t, Calibration> g_calib_cache;

// ---------------------------------------------------------------------------
// weighted paths
// ---------------------------------------------------------------------------

// Node values of w(s) = s^p * phi(s). For p < 0 the value at s = 0 blows
// up, so node 0 is replaced by the value that makes the piecewise-linear
// interpolant reproduce the exact first-cell mean of s^p * linear(phi).
// For p = 0 this reduces to w_0 = phi_0 identically.
Path weighted_power(const Path& phi, double p) {
  const int n = phi.grid.steps();
  const double dt = phi.grid.dt();
  Path w(phi.grid, 1);
  for (int k = 1; k <= n; ++k)
    w.values(k, 0) = std::pow(phi.grid.node(k), p) * phi.values(k, 0);
  const double coeff_a = 1.0 / ((p + 1.0) * (p + 2.0));
  const double coeff_b = 1.0 / (p + 2.0);
  w.values(0, 0) = 2.0 * std::pow(dt, p) *
                       (coeff_a * phi.values(0, 0) + coeff_b * phi.values(1, 0)) -
                   w.values(1, 0);
  return w;
}

// Node-wise multiplication by t^p for p >= 0 (t = 0 contributes 0^p).
Path node_weight(const Path& f, double p) {
  Path out(f.grid, 1);
  for (int k = 0; k <= f.grid.steps(); ++k)
    out.values(k, 0) = std::pow(f.grid.node(k), p) * f.values(k, 0);
  return out;
}

Path unit_operator_k(const Path& phi, const Hurst& h) {
  const double hv = h.value();
  if (hv > 0.5) {
    Path inner = frac::int_left(weighted_power(phi, 0.5 - hv), hv - 0.5);
    return frac::cumtrapz(node_weight(inner, hv - 0.5));
  }
  Path inner = frac::int_left(weighted_power(phi, hv - 0.5), 0.5 - hv);
  return frac::int_left(node_weight(inner, 0.5 - hv), 2.0 * hv);
}

Path unit_operator_kstar(const Path& f, const Hurst& h) {
  const double hv = h.value();
  const int n = f.grid.steps();
  Path out(f.grid, 1);
  if (hv > 0.5) {
    Path inner = frac::int_right(node_weight(f, hv - 0.5), hv - 0.5);
    for (int k = 1; k <= n; ++k)
      out.values(k, 0) =
          std::pow(f.grid.node(k), 0.5 - hv) * inner.values(k, 0);
    out.values(0, 0) = 0.0;  // kernel slice diverges at s = 0
    return out;
  }
  Path w = node_weight(f, hv - 0.5);
  w.values(0, 0) = 0.0;  // unused by the right derivative away from t = 0
  Path inner = frac::deriv_right(w, 0.5 - hv);
  for (int k = 1; k < n; ++k)
    out.values(k, 0) = std::pow(f.grid.node(k), 0.5 - hv) * inner.values(k, 0);
  out.values(0, 0) = 0.0;
  out.values(n, 0) = 0.0;  // excluded endpoint of the right derivative
  return out;
}

// Piecewise-linear ramp approximating the indicator of [0, t_i]: one on
// nodes 0..i, zero from node i+1 on.
Path indicator_ramp(const TimeGrid& grid, int i) {
  Path f(grid, 1);
  for (int k = 0; k <= i && k <= grid.steps(); ++k) f.values(k, 0) = 1.0;
  return f;
}

Calibration calibrate(const Hurst& h) {
  Calibration cal;
  if (h.is_brownian()) return cal;  // exact reductions, constant 1

  const TimeGrid grid(kReferenceGridN);
  const int n = grid.steps();
  const double sqrt_dt = std::sqrt(grid.dt());
  auto gram = shared_gram(grid, h);
  const Eigen::MatrixXd& l = gram->chol;

  // The fit runs over the well-resolved region of the kernel: a few cells
  // around the diagonal and the s = 0 column carry the kernel
  // singularities, where nodal values and cell-averaged Cholesky entries
  // measure different things.
  constexpr int kMargin = 4;

  // operator_K: columns are images of the nodal hat functions; the target
  // operator applies L to nodal data with a sqrt(dt) quadrature factor.
  {
    double num = 0.0, den = 0.0;
    Path hat(grid, 1);
    for (int j = kMargin; j <= n; ++j) {
      hat.values.setZero();
      hat.values(j, 0) = 1.0;
      Path img = unit_operator_k(hat, h);
      for (int i = j + kMargin; i <= n; ++i) {
        const double target = sqrt_dt * l(i - 1, j - 1);
        num += img.values(i, 0) * target;
        den += img.values(i, 0) * img.values(i, 0);
      }
    }
    cal.c_k = num / den;
  }

  // operator_Kstar: images of indicator ramps against kernel slices
  // L(i,.)/sqrt(dt). The excluded endpoint node n never enters the fit.
  {
    double num = 0.0, den = 0.0;
    for (int i = 2 * kMargin; i <= n; ++i) {
      Path img = unit_operator_kstar(indicator_ramp(grid, i), h);
      for (int j = kMargin; j <= i - kMargin; ++j) {
        const double target = l(i - 1, j - 1) / sqrt_dt;
        num += img.values(j, 0) * target;
        den += img.values(j, 0) * img.values(j, 0);
      }
    }
    cal.c_kstar = num / den;
  }
  return cal;
}

void require_scalar(const Path& p, const char* op) {
  if (p.dim() != 1)
    throw ValidationError(std::string(op) + ": scalar path required");
}

void require_zero_start(const Path& p, const char* op) {
  if (!p.starts_at_zero(1e-10))
    throw ValidationError(std::string(op) + ": path must start at 0");
}

}  // namespace

std::shared_ptr<const fbm::CovGram> shared_gram(const TimeGrid& grid,
                                                const Hurst& h) {
  const auto key = std::make_pair(grid.steps(), hurst_key(h));
  {
    std::lock_guard lock(g_gram_mutex);
    auto it = g_gram_cache.find(key);
    if (it != g_gram_cache.end()) return it->second;
  }
  auto fresh = std::make_shared<const fbm::CovGram>(fbm::gram(grid, h));
  std::lock_guard lock(g_gram_mutex);
  auto [it, inserted] = g_gram_cache.emplace(key, std::move(fresh));
  return it->second;
}

const Calibration& calibration(const Hurst& h) {
  const auto key = hurst_key(h);
  {
    std::lock_guard lock(g_calib_mutex);
    auto it = g_calib_cache.find(key);
    if (it != g_calib_cache.end()) return it->second;
  }
  Calibration cal = calibrate(h);
  std::lock_guard lock(g_calib_mutex);
  auto [it, inserted] = g_calib_cache.emplace(key, cal);
  return it->second;
}

Path operator_K(const Path& phi, const Hurst& h) {
  require_scalar(phi, "operator_K");
  if (h.is_brownian()) return frac::cumtrapz(phi);
  Path out = unit_operator_k(phi, h);
  out.values *= calibration(h).c_k;
  return out;
}

Path operator_Kstar(const Path& f, const Hurst& h) {
  require_scalar(f, "operator_Kstar");
  if (h.is_brownian()) return f;
  Path out = unit_operator_kstar(f, h);
  out.values *= calibration(h).c_kstar;
  return out;
}

CMNormResult cm_norm(const Path& h, const Hurst& hurst) {
  require_zero_start(h, "cm_norm");
  const int n = h.grid.steps();
  auto gram = shared_gram(h.grid, hurst);
  double sq = 0.0;
  Eigen::VectorXd rhs(n);
  for (int c = 0; c < h.dim(); ++c) {
    rhs = h.values.col(c).tail(n);
    gram->chol.triangularView<Eigen::Lower>().solveInPlace(rhs);
    sq += rhs.squaredNorm();
  }
  return {std::sqrt(sq), n, "grid-rkhs"};
}

CMNormResult cm_norm_kinv(const Path& h, const Hurst& hurst) {
  require_scalar(h, "cm_norm_kinv");
  require_zero_start(h, "cm_norm_kinv");
  if (!(hurst.value() > 0.5))
    throw CapabilityError(
        "cm_norm_kinv: only the H > 1/2 branch is implemented; use cm_norm");
  const int n = h.grid.steps();
  const double dt = h.grid.dt();
  const double hv = hurst.value();

  // finite-difference derivative of h at the nodes
  Path hdot(h.grid, 1);
  hdot.values(0, 0) = (h.values(1, 0) - h.values(0, 0)) / dt;
  for (int k = 1; k < n; ++k)
    hdot.values(k, 0) = (h.values(k + 1, 0) - h.values(k - 1, 0)) / (2.0 * dt);
  hdot.values(n, 0) = (h.values(n, 0) - h.values(n - 1, 0)) / dt;

  // phi(t) = t^{H-1/2} D^{H-1/2}( s^{1/2-H} h'(s) )(t) / C_K. The weighted
  // data is singular at s = 0, so the known power part h'(0) s^{1/2-H} is
  // differentiated in closed form and the grid operator only sees the
  // remainder, which vanishes at the origin.
  const double p = 0.5 - hv;
  const double alpha = hv - 0.5;
  const double lead = hdot.values(0, 0) * std::tgamma(p + 1.0) /
                      std::tgamma(p + 1.0 - alpha);
  Path remainder(h.grid, 1);
  remainder.values(0, 0) = 0.0;
  for (int k = 1; k <= n; ++k)
    remainder.values(k, 0) = std::pow(h.grid.node(k), p) *
                             (hdot.values(k, 0) - hdot.values(0, 0));
  Path d = frac::deriv_left(remainder, alpha);
  Path phi(h.grid, 1);
  phi.values(0, 0) = 0.0;
  const double c_k = calibration(hurst).c_k;
  for (int k = 1; k <= n; ++k) {
    const double t = h.grid.node(k);
    phi.values(k, 0) =
        (lead * std::pow(t, 0.5 - hv) +
         std::pow(t, hv - 0.5) * d.values(k, 0)) /
        c_k;
  }

  // L^2 norm: trapezoid away from 0; the first cell integrates a fitted
  // power phi ~ t^kappa exactly, since phi may be singular at the origin.
  double sq = 0.0;
  for (int k = 1; k < n; ++k)
    sq += 0.5 * dt *
          (phi.values(k, 0) * phi.values(k, 0) +
           phi.values(k + 1, 0) * phi.values(k + 1, 0));
  const double p1 = std::abs(phi.values(1, 0));
  const double p2 = n >= 2 ? std::abs(phi.values(2, 0)) : 0.0;
  double kappa = 0.0;
  if (p1 > 0.0 && p2 > 0.0) kappa = std::log(p2 / p1) / std::log(2.0);
  kappa = std::max(kappa, -0.49);
  sq += p1 * p1 * dt / (2.0 * kappa + 1.0);

  return {std::sqrt(sq), n, "k-inverse"};
}

double pairing(const Path& f, const Path& h) {
  if (!(f.grid == h.grid) || f.dim() != h.dim())
    throw ValidationError("pairing: paths must share grid and dimension");
  double acc = 0.0;
  for (int k = 0; k < f.grid.steps(); ++k)
    acc += f.values.row(k).dot(h.values.row(k + 1) - h.values.row(k));
  return acc;
}

double w12_norm(const Path& h) {
  require_zero_start(h, "w12_norm");
  const double dt = h.grid.dt();
  double sq = 0.0;
  for (int k = 0; k < h.grid.steps(); ++k)
    sq += (h.values.row(k + 1) - h.values.row(k)).squaredNorm() / dt;
  return std::sqrt(sq);
}

}  // namespace rde::cm
