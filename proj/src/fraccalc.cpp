#include "rde/fraccalc.hpp"

#include <cmath>

namespace rde::frac {

namespace {

void require_scalar(const Path& f, const char* op) {
  if (f.dim() != 1)
    throw ValidationError(std::string(op) + ": scalar path required");
}

void require_deriv_order(double alpha, const char* op) {
  if (!(alpha > 0.0) || !(alpha < 1.0))
    throw ValidationError(std::string(op) +
                          ": derivative order must lie in (0,1)");
}

// Integral over one cell of u^(alpha-1) * linear(u), where the linear factor
// interpolates (a -> fa, b -> fb) and 0 <= a < b. Used with u = |t_k - s|.
inline double cell_weighted(double a, double b, double fa, double fb,
                            double alpha) {
  const double width = b - a;
  const double m0 = (std::pow(b, alpha) - std::pow(a, alpha)) / alpha;
  const double m1 =
      (std::pow(b, alpha + 1.0) - std::pow(a, alpha + 1.0)) / (alpha + 1.0);
  return fa * (b * m0 - m1) / width + fb * (m1 - a * m0) / width;
}

}  // namespace

Path cumtrapz(const Path& f) {
  Path out(f.grid, f.dim());
  const double dt = f.grid.dt();
  for (int c = 0; c < f.dim(); ++c) {
    double acc = 0.0;
    out.values(0, c) = 0.0;
    for (int k = 1; k < f.grid.nodes(); ++k) {
      acc += 0.5 * dt * (f.values(k - 1, c) + f.values(k, c));
      out.values(k, c) = acc;
    }
  }
  return out;
}

Path int_left(const Path& f, double alpha) {
  require_scalar(f, "int_left");
  if (!(alpha > 0.0))
    throw ValidationError("int_left: order must be positive");
  const int n = f.grid.steps();
  const double inv_gamma = 1.0 / std::tgamma(alpha);
  Path out(f.grid, 1);
  for (int k = 1; k <= n; ++k) {
    const double tk = f.grid.node(k);
    double acc = 0.0;
    // cell [t_j, t_{j+1}] maps to u = t_k - s in [a, b]
    for (int j = 0; j < k; ++j) {
      const double a = tk - f.grid.node(j + 1);
      const double b = tk - f.grid.node(j);
      acc += cell_weighted(a, b, f.values(j + 1, 0), f.values(j, 0), alpha);
    }
    out.values(k, 0) = inv_gamma * acc;
  }
  return out;
}

Path int_right(const Path& f, double alpha) {
  require_scalar(f, "int_right");
  if (!(alpha > 0.0))
    throw ValidationError("int_right: order must be positive");
  const int n = f.grid.steps();
  const double inv_gamma = 1.0 / std::tgamma(alpha);
  Path out(f.grid, 1);
  for (int k = n - 1; k >= 0; --k) {
    const double tk = f.grid.node(k);
    double acc = 0.0;
    // cell [t_j, t_{j+1}] with j >= k maps to u = s - t_k in [a, b]
    for (int j = k; j < n; ++j) {
      const double a = f.grid.node(j) - tk;
      const double b = f.grid.node(j + 1) - tk;
      acc += cell_weighted(a, b, f.values(j, 0), f.values(j + 1, 0), alpha);
    }
    out.values(k, 0) = inv_gamma * acc;
  }
  return out;
}

Path deriv_left(const Path& f, double alpha) {
  require_scalar(f, "deriv_left");
  require_deriv_order(alpha, "deriv_left");
  const int n = f.grid.steps();
  const double dt = f.grid.dt();
  const double inv_gamma = 1.0 / std::tgamma(1.0 - alpha);
  Path out(f.grid, 1);
  out.values(0, 0) = 0.0;  // excluded endpoint
  for (int k = 1; k <= n; ++k) {
    const double tk = f.grid.node(k);
    const double fk = f.values(k, 0);
    // singular integral of g(s) = f(t_k) - f(s) against (t_k-s)^(-alpha-1);
    // g is piecewise linear with g(t_k) = 0, which keeps every cell finite.
    double acc = 0.0;
    for (int j = 0; j < k - 1; ++j) {
      const double a = tk - f.grid.node(j + 1);
      const double b = tk - f.grid.node(j);
      const double ga = fk - f.values(j + 1, 0);
      const double gb = fk - f.values(j, 0);
      const double m0 = (std::pow(a, -alpha) - std::pow(b, -alpha)) / alpha;
      const double m1 = (std::pow(b, 1.0 - alpha) - std::pow(a, 1.0 - alpha)) /
                        (1.0 - alpha);
      acc += ga * (b * m0 - m1) / dt + gb * (m1 - a * m0) / dt;
    }
    // last cell: a = 0, the g(t_k) = 0 endpoint kills the divergent moment
    {
      const double b = dt;
      const double gb = fk - f.values(k - 1, 0);
      acc += gb * std::pow(b, -alpha) / (1.0 - alpha);
    }
    out.values(k, 0) = inv_gamma * (fk * std::pow(tk, -alpha) + alpha * acc);
  }
  return out;
}

Path deriv_right(const Path& f, double alpha) {
  require_scalar(f, "deriv_right");
  require_deriv_order(alpha, "deriv_right");
  const int n = f.grid.steps();
  const double dt = f.grid.dt();
  const double inv_gamma = 1.0 / std::tgamma(1.0 - alpha);
  Path out(f.grid, 1);
  out.values(n, 0) = 0.0;  // excluded endpoint
  for (int k = 0; k < n; ++k) {
    const double tk = f.grid.node(k);
    const double fk = f.values(k, 0);
    double acc = 0.0;
    for (int j = k + 1; j < n; ++j) {
      const double a = f.grid.node(j) - tk;
      const double b = f.grid.node(j + 1) - tk;
      const double ga = fk - f.values(j, 0);
      const double gb = fk - f.values(j + 1, 0);
      const double m0 = (std::pow(a, -alpha) - std::pow(b, -alpha)) / alpha;
      const double m1 = (std::pow(b, 1.0 - alpha) - std::pow(a, 1.0 - alpha)) /
                        (1.0 - alpha);
      acc += ga * (b * m0 - m1) / dt + gb * (m1 - a * m0) / dt;
    }
    {
      const double b = dt;
      const double gb = fk - f.values(k + 1, 0);
      acc += gb * std::pow(b, -alpha) / (1.0 - alpha);
    }
    out.values(k, 0) =
        inv_gamma * (fk * std::pow(1.0 - tk, -alpha) + alpha * acc);
  }
  return out;
}

}  // namespace rde::frac
