#pragma once

#include "rde/sde.hpp"

namespace rde::mall {

/// Deterministic covariance matrix of the first-order perturbation of the
/// flow endpoint. `regime` records the formula used: the double-integral
/// representation (H > 1/2) or the L^2 lower-bound surrogate (H <= 1/2,
/// reported up to the unknown embedding constant).
struct GammaMatrix {
  Eigen::MatrixXd matrix;
  double hurst = 0.0;
  std::string regime;
  double det = 0.0;
};

/// Sensitivity kernel of the endpoint with respect to the driver:
/// node s holds J_1 J_s^{-1} V(Phi_s), an N x d matrix.
std::vector<Eigen::MatrixXd> dphi_kernel(const sde::SolveResult& result,
                                         const VectorFieldSet& fields);

/// H > 1/2 covariance: H(2H-1) * double integral of K(s) K(t)^T against
/// |t-s|^{2H-2}. The singular weight is integrated exactly over every cell
/// pair; the smooth factor enters at cell midpoints. The constant is the
/// one that makes the identity-field covariance equal R(1,1) * I exactly.
GammaMatrix gamma_young(const sde::SolveResult& result,
                        const VectorFieldSet& fields, const Hurst& h);

/// H <= 1/2 lower-bound surrogate: trapezoid integral of K(t) K(t)^T over
/// [0,1]. Positive semidefinite by construction.
GammaMatrix gamma_l2_bound(const sde::SolveResult& result,
                           const VectorFieldSet& fields, const Hurst& h);

GammaMatrix gamma_for_regime(const sde::SolveResult& result,
                             const VectorFieldSet& fields, const Hurst& h);

struct ScanRecord {
  int iter = 0;
  double h_norm = 0.0;
  double det = 0.0;
  std::string regime;
  bool converged = true;
};

struct ScanResult {
  double det_min = 0.0;
  double det_max = 0.0;
  int excluded = 0;  // cells dropped for non-convergence
  std::vector<ScanRecord> records;
};

/// Nondegeneracy scan: random smooth drivers rescaled to RKHS norm u*M
/// with u uniform, pushed through the flow; extremal determinants of the
/// covariance matrix over the scan are the certified output.
ScanResult nondegeneracy_scan(const Eigen::VectorXd& x,
                              const VectorFieldSet& fields, const Hurst& h,
                              double m_bound, int count, std::uint64_t seed,
                              int grid_n = 128, int threads = 1);

/// CSV rows `iter,h_norm,det,regime,converged`.
void write_scan_csv(std::ostream& os, const ScanResult& scan);

}  // namespace rde::mall
