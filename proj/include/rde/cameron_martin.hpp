#pragma once

#include "rde/fbm.hpp"

#include <memory>

namespace rde::cm {

/// Reproducing-kernel norm of a grid path. `method` records which route
/// produced the value: the Gram quadratic form ("grid-rkhs") or the
/// analytic inverse-operator route ("k-inverse", H > 1/2 only).
struct CMNormResult {
  double value = 0.0;
  int grid_n = 0;
  std::string method;
};

/// Lower-triangular integral operator mapping L^2 data to paths of the
/// process: a two-branch composition of power weights and fractional
/// integrals. At H = 1/2 it degenerates to cumulative integration.
/// The multiplicative constant is calibrated once per H so that the
/// discrete operator reproduces the Cholesky factor of the Gram on a
/// reference grid (least squares at n = 256); see calibration().
Path operator_K(const Path& phi, const Hurst& h);

/// Adjoint-side operator carrying indicators 1_[0,t] to kernel slices
/// K(t,.). Identity at H = 1/2; for H < 1/2 the formula involves a right
/// fractional derivative and the value at the singular endpoint t = 1 is
/// excluded (node n reported as 0). Same calibration convention as
/// operator_K.
Path operator_Kstar(const Path& f, const Hurst& h);

/// Per-Hurst fitted operator constants (reference grid n = 256) plus the
/// factor shared with the analytic expression for H > 1/2.
struct Calibration {
  double c_k = 1.0;      // operator_K constant
  double c_kstar = 1.0;  // operator_Kstar constant
};
const Calibration& calibration(const Hurst& h);

/// Shared Gram cache keyed on (n, H); gram factorizations are reused by
/// every norm evaluation. Thread safe.
std::shared_ptr<const fbm::CovGram> shared_gram(const TimeGrid& grid,
                                                const Hurst& h);

/// RKHS norm through the Gram quadratic form h^T R^{-1} h on nodes
/// t_1..t_n (components summed in quadrature). Finite-dimensional
/// projection of the reproducing-kernel norm: nondecreasing under grid
/// refinement. Requires h(0) = 0.
CMNormResult cm_norm(const Path& h, const Hurst& hurst);

/// Norm via the inverse operator: phi = K^{-1}h recovered with power
/// weights and a left fractional derivative of order H - 1/2, value
/// = ||phi||_{L^2}. Only the H > 1/2 branch is implemented; H <= 1/2 is
/// rejected (use cm_norm).
CMNormResult cm_norm_kinv(const Path& h, const Hurst& hurst);

/// Young pairing <f, h> = int_0^1 f dh as a left-point Riemann-Stieltjes
/// sum. f and h must share grid and dimension.
double pairing(const Path& f, const Path& h);

/// ||h'||_{L^2} of the piecewise-linear interpolant (finite differences);
/// the W^{1,2} seminorm that dominates the RKHS norm for H < 1/2.
double w12_norm(const Path& h);

}  // namespace rde::cm
