#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace rde {

// Error taxonomy. Validation: rejected inputs. Capability: a valid request
// outside the supported range. Numerical: a computation that failed at
// runtime (factorization, convergence).
struct ValidationError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct CapabilityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class HurstRegime { Rough, Brownian, Young };

/// Hurst index in (0,1). Regime is a pure function of the value:
/// Rough below 1/2, Brownian at exactly 1/2, Young above.
class Hurst {
 public:
  explicit Hurst(double value) : value_(value) {
    if (!(value > 0.0) || !(value < 1.0))
      throw ValidationError("hurst: value must lie strictly inside (0,1)");
  }
  double value() const { return value_; }
  HurstRegime regime() const {
    if (value_ < 0.5) return HurstRegime::Rough;
    if (value_ > 0.5) return HurstRegime::Young;
    return HurstRegime::Brownian;
  }
  bool is_brownian() const { return value_ == 0.5; }

 private:
  double value_;
};

/// Uniform partition of [0,1] with n steps, nodes t_k = k/n, k = 0..n.
class TimeGrid {
 public:
  explicit TimeGrid(int n) : n_(n) {
    if (n < 1) throw ValidationError("grid: step count must be >= 1");
  }
  int steps() const { return n_; }
  int nodes() const { return n_ + 1; }
  double dt() const { return 1.0 / n_; }
  double node(int k) const { return static_cast<double>(k) / n_; }

  friend bool operator==(const TimeGrid& a, const TimeGrid& b) {
    return a.n_ == b.n_;
  }

 private:
  int n_;
};

inline TimeGrid make_grid(int n) { return TimeGrid(n); }

/// Grid samples of an R^m-valued path. Row k holds the value at t_k.
/// Noise and Cameron-Martin paths start at zero; start() enforces that
/// where callers require it.
struct Path {
  TimeGrid grid;
  Eigen::MatrixXd values;  // (n+1) x dim

  Path(TimeGrid g, int dim)
      : grid(g), values(Eigen::MatrixXd::Zero(g.nodes(), dim)) {
    if (dim < 1) throw ValidationError("path: dimension must be >= 1");
  }
  Path(TimeGrid g, Eigen::MatrixXd v) : grid(g), values(std::move(v)) {
    if (values.rows() != grid.nodes())
      throw ValidationError("path: row count must equal grid node count");
    if (values.cols() < 1)
      throw ValidationError("path: dimension must be >= 1");
  }

  int dim() const { return static_cast<int>(values.cols()); }
  bool starts_at_zero(double tol = 1e-12) const {
    return values.row(0).cwiseAbs().maxCoeff() <= tol;
  }
};

/// Scalar path built from a callable f(t).
template <typename F>
Path sample_function(const TimeGrid& g, F&& f) {
  Path p(g, 1);
  for (int k = 0; k < g.nodes(); ++k) p.values(k, 0) = f(g.node(k));
  return p;
}

// ---------------------------------------------------------------------------
// Vector fields
// ---------------------------------------------------------------------------

/// Driving fields V_1..V_d as the columns of the N x d matrix V(x), with
/// Jacobian dV(x) stored as an N x (d*N) block matrix whose (a, i*N + c)
/// entry is d V_{a,i} / d x_c. Optional drift V_0 with its own Jacobian.
/// lambda1/lambda2 are the declared two-sided ellipticity constants for
/// xi^T V V^T xi.
struct VectorFieldSet {
  int state_dim = 0;    // N
  int driving_dim = 0;  // d
  std::function<void(const Eigen::VectorXd&, Eigen::Ref<Eigen::MatrixXd>)> eval;
  std::function<void(const Eigen::VectorXd&, Eigen::Ref<Eigen::MatrixXd>)> jac;
  std::function<void(const Eigen::VectorXd&, Eigen::Ref<Eigen::VectorXd>)> drift;      // optional
  std::function<void(const Eigen::VectorXd&, Eigen::Ref<Eigen::MatrixXd>)> drift_jac;  // optional, N x N
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  std::string name;

  Eigen::MatrixXd eval_at(const Eigen::VectorXd& x) const {
    Eigen::MatrixXd v(state_dim, driving_dim);
    eval(x, v);
    return v;
  }
  Eigen::MatrixXd jac_at(const Eigen::VectorXd& x) const {
    Eigen::MatrixXd j(state_dim, driving_dim * state_dim);
    jac(x, j);
    return j;
  }
  bool has_drift() const { return static_cast<bool>(drift); }
};

using ParamMap = std::map<std::string, double>;

/// Builds one of the registered closed-form field families.
///   identity        V(x) = Id, requires d = N; lambda1 = lambda2 = 1
///   const-sigma     V(x) = sigma * Id (param "sigma" != 0); lambda = sigma^2
///   sin-perturbed   V(x) = Id + eps * diag(sin x_i) (param "eps", |eps| < 1)
/// Unknown names and parameters outside the documented range are rejected.
VectorFieldSet registry_build(const std::string& name, const ParamMap& params,
                              int state_dim);

std::vector<std::string> registry_names();

/// Certifies lambda1 |xi|^2 <= xi^T V V^T xi <= lambda2 |xi|^2 on random
/// probes (x, xi) with x in [-box, box]^N. Throws NumericalError on a
/// violated probe. The restriction to a probe box is documented behaviour:
/// the bounds are declared for all states, checked on the box.
void check_ellipticity(const VectorFieldSet& fields, double box = 10.0,
                       int probes = 100, std::uint64_t seed = 0x5eedu);

/// Checks jac against central finite differences of eval at random points.
/// Returns the worst relative error observed.
double jac_consistency_error(const VectorFieldSet& fields, double box = 2.0,
                             int probes = 20, std::uint64_t seed = 0x5eedu);

// ---------------------------------------------------------------------------
// RNG streams
// ---------------------------------------------------------------------------

/// Deterministic stream contract: every stochastic operation takes a
/// (seed, stream) pair and identical inputs reproduce identical output on
/// one platform. Streams are cheap to construct; substreams are derived
/// with derive().
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream);

  /// Substream id mixing, collision-free for index < 2^20 per parent.
  static std::uint64_t derive(std::uint64_t stream, std::uint64_t index) {
    return stream * (1ull << 20) + index + 1;
  }

  double uniform();        // [0,1)
  double normal();         // standard Gaussian (Box-Muller, cached spare)
  std::uint64_t next_u64();

 private:
  std::uint64_t s_[4];
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// Random smooth path with value 0 at t=0: a linear term plus a few Fourier
/// modes with 1/j-decaying amplitudes. Used by scans and property tests that
/// need generic Cameron-Martin directions.
Path random_smooth_path(const TimeGrid& grid, int dim, RngStream& rng);

// ---------------------------------------------------------------------------
// Deterministic parallel map
// ---------------------------------------------------------------------------

/// Runs fn(i) for i in [0, count). With threads > 1 the index range is
/// split into contiguous chunks; fn must write only to its own slot so the
/// result does not depend on the thread count.
void parallel_for(std::int64_t count, int threads,
                  const std::function<void(std::int64_t)>& fn);

}  // namespace rde
