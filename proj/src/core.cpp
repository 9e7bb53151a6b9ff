#include "rde/core.hpp"

#include <cmath>
#include <thread>

namespace rde {

// ---------------------------------------------------------------------------
// Registry
// ---------------------------------------------------------------------------

namespace {

double get_param(const ParamMap& params, const std::string& key, double dflt) {
  auto it = params.find(key);
  return it == params.end() ? dflt : it->second;
}

VectorFieldSet build_identity(const ParamMap&, int n) {
  VectorFieldSet f;
  f.state_dim = n;
  f.driving_dim = n;
  f.eval = [](const Eigen::VectorXd& x, Eigen::Ref<Eigen::MatrixXd> v) {
    v.setIdentity();
    (void)x;
  };
  f.jac = [](const Eigen::VectorXd&, Eigen::Ref<Eigen::MatrixXd> j) {
    j.setZero();
  };
  f.lambda1 = 1.0;
  f.lambda2 = 1.0;
  f.name = "identity";
  return f;
}

VectorFieldSet build_const_sigma(const ParamMap& params, int n) {
  const double sigma = get_param(params, "sigma", 1.0);
  if (sigma == 0.0)
    throw ValidationError("const-sigma: parameter sigma must be nonzero");
  VectorFieldSet f;
  f.state_dim = n;
  f.driving_dim = n;
  f.eval = [sigma](const Eigen::VectorXd&, Eigen::Ref<Eigen::MatrixXd> v) {
    v.setIdentity();
    v *= sigma;
  };
  f.jac = [](const Eigen::VectorXd&, Eigen::Ref<Eigen::MatrixXd> j) {
    j.setZero();
  };
  f.lambda1 = sigma * sigma;
  f.lambda2 = sigma * sigma;
  f.name = "const-sigma";
  return f;
}

VectorFieldSet build_sin_perturbed(const ParamMap& params, int n) {
  const double eps = get_param(params, "eps", 0.1);
  if (!(std::abs(eps) < 1.0))
    throw ValidationError(
        "sin-perturbed: parameter eps must satisfy |eps| < 1 (ellipticity)");
  VectorFieldSet f;
  f.state_dim = n;
  f.driving_dim = n;
  f.eval = [eps](const Eigen::VectorXd& x, Eigen::Ref<Eigen::MatrixXd> v) {
    v.setIdentity();
    for (int i = 0; i < x.size(); ++i) v(i, i) += eps * std::sin(x(i));
  };
  // dV_{a,i}/dx_c nonzero only for a = i = c.
  f.jac = [eps, n](const Eigen::VectorXd& x, Eigen::Ref<Eigen::MatrixXd> j) {
    j.setZero();
    for (int i = 0; i < x.size(); ++i)
      j(i, i * n + i) = eps * std::cos(x(i));
  };
  const double lo = 1.0 - std::abs(eps), hi = 1.0 + std::abs(eps);
  f.lambda1 = lo * lo;
  f.lambda2 = hi * hi;
  f.name = "sin-perturbed";
  return f;
}

struct RegistryEntry {
  const char* name;
  VectorFieldSet (*builder)(const ParamMap&, int);
};

constexpr RegistryEntry kRegistry[] = {
    {"identity", build_identity},
    {"const-sigma", build_const_sigma},
    {"sin-perturbed", build_sin_perturbed},
};

}  // namespace

VectorFieldSet registry_build(const std::string& name, const ParamMap& params,
                              int state_dim) {
  if (state_dim < 1)
    throw ValidationError("registry: state dimension must be >= 1");
  for (const auto& entry : kRegistry)
    if (name == entry.name) return entry.builder(params, state_dim);
  std::string known;
  for (const auto& entry : kRegistry)
    known += std::string(known.empty() ? "" : ", ") + entry.name;
  throw ValidationError("registry: unknown field family '" + name +
                        "'; known: " + known);
}

std::vector<std::string> registry_names() {
  std::vector<std::string> names;
  for (const auto& entry : kRegistry) names.emplace_back(entry.name);
  return names;
}

void check_ellipticity(const VectorFieldSet& fields, double box, int probes,
                       std::uint64_t seed) {
  RngStream rng(seed, 0);
  const int n = fields.state_dim;
  Eigen::MatrixXd v(n, fields.driving_dim);
  Eigen::VectorXd x(n), xi(n);
  const double slack = 1e-12;
  for (int p = 0; p < probes; ++p) {
    for (int i = 0; i < n; ++i) x(i) = box * (2.0 * rng.uniform() - 1.0);
    for (int i = 0; i < n; ++i) xi(i) = rng.normal();
    const double nxi2 = xi.squaredNorm();
    if (nxi2 == 0.0) continue;
    fields.eval(x, v);
    const double q = (v.transpose() * xi).squaredNorm();
    if (q < fields.lambda1 * nxi2 - slack ||
        q > fields.lambda2 * nxi2 + slack)
      throw NumericalError("ellipticity certificate failed for '" +
                           fields.name + "'");
  }
}

double jac_consistency_error(const VectorFieldSet& fields, double box,
                             int probes, std::uint64_t seed) {
  RngStream rng(seed, 1);
  const int n = fields.state_dim, d = fields.driving_dim;
  const double delta = 1e-5;
  Eigen::MatrixXd jac(n, d * n), vp(n, d), vm(n, d);
  Eigen::VectorXd x(n);
  double worst = 0.0;
  for (int p = 0; p < probes; ++p) {
    for (int i = 0; i < n; ++i) x(i) = box * (2.0 * rng.uniform() - 1.0);
    fields.jac(x, jac);
    double scale = std::max(1.0, jac.cwiseAbs().maxCoeff());
    for (int c = 0; c < n; ++c) {
      Eigen::VectorXd xp = x, xm = x;
      xp(c) += delta;
      xm(c) -= delta;
      fields.eval(xp, vp);
      fields.eval(xm, vm);
      for (int a = 0; a < n; ++a)
        for (int i = 0; i < d; ++i) {
          const double fd = (vp(a, i) - vm(a, i)) / (2.0 * delta);
          worst = std::max(worst, std::abs(fd - jac(a, i * n + c)) / scale);
        }
    }
  }
  return worst;
}

// ---------------------------------------------------------------------------
// RNG: xoshiro256++ with splitmix64 seeding, plus Box-Muller normals.
// ---------------------------------------------------------------------------

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

inline std::uint64_t rotl(std::uint64_t x, int k) {
  return (x << k) | (x >> (64 - k));
}

}  // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t mix = seed ^ (stream * 0xda942042e4dd58b5ull + 0x9e3779b9ull);
  for (auto& word : s_) word = splitmix64(mix);
}

std::uint64_t RngStream::next_u64() {
  const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double RngStream::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngStream::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1 = 0.0;
  do {
    u1 = uniform();
  } while (u1 <= 0.0);
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double a = 2.0 * M_PI * u2;
  spare_ = r * std::sin(a);
  has_spare_ = true;
  return r * std::cos(a);
}

Path random_smooth_path(const TimeGrid& grid, int dim, RngStream& rng) {
  constexpr int modes = 4;
  Path p(grid, dim);
  for (int c = 0; c < dim; ++c) {
    const double a0 = rng.normal();
    double amp[modes];
    for (int j = 0; j < modes; ++j) amp[j] = rng.normal() / (j + 1.0);
    for (int k = 0; k < grid.nodes(); ++k) {
      const double t = grid.node(k);
      double v = a0 * t;
      for (int j = 0; j < modes; ++j)
        v += amp[j] * std::sin((j + 1) * M_PI * t) / ((j + 1) * M_PI);
      p.values(k, c) = v;
    }
  }
  return p;
}

void parallel_for(std::int64_t count, int threads,
                  const std::function<void(std::int64_t)>& fn) {
  if (count <= 0) return;
  if (threads <= 0) threads = 1;
  threads = static_cast<int>(
      std::min<std::int64_t>(threads, count));
  if (threads == 1) {
    for (std::int64_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(threads);
  const std::int64_t chunk = (count + threads - 1) / threads;
  for (int t = 0; t < threads; ++t) {
    const std::int64_t lo = t * chunk;
    const std::int64_t hi = std::min(count, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &fn] {
      for (std::int64_t i = lo; i < hi; ++i) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace rde
