#include "rde/cli.hpp"

#include "rde/acceptance.hpp"
#include "rde/cameron_martin.hpp"
#include "rde/density.hpp"
#include "rde/distance.hpp"
#include "rde/fbm.hpp"
#include "rde/svg.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace rde::cli {

namespace fs = std::filesystem;

namespace {

struct CommonConfig {
  double hurst = 0.0;
  int grid_n = 64;
  std::string field = "identity";
  std::vector<std::string> field_params;
  std::vector<double> x;
  std::uint64_t seed = 42;
  int threads = 1;
  std::string out_dir = "out";
};

ParamMap parse_params(const std::vector<std::string>& kv) {
  ParamMap params;
  for (const auto& s : kv) {
    const auto eq = s.find('=');
    if (eq == std::string::npos)
      throw ValidationError("field-param must look like key=value, got '" +
                            s + "'");
    params[s.substr(0, eq)] = std::stod(s.substr(eq + 1));
  }
  return params;
}

Eigen::VectorXd to_vec(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), v.size());
}

void add_common(CLI::App* cmd, CommonConfig& cfg, bool needs_field) {
  cmd->add_option("--hurst", cfg.hurst, "Hurst index in (0,1)")->required();
  cmd->add_option("--grid-n", cfg.grid_n, "grid steps on [0,1]");
  cmd->add_option("--seed", cfg.seed, "RNG seed");
  cmd->add_option("--threads", cfg.threads, "worker cap");
  cmd->add_option("--out-dir", cfg.out_dir, "output directory");
  if (needs_field) {
    cmd->add_option("--field", cfg.field, "field family (registry name)");
    cmd->add_option("--field-param", cfg.field_params,
                    "family parameter key=value (repeatable)");
    cmd->add_option("--x", cfg.x, "initial point (repeat or comma list)")
        ->delimiter(',');
  }
}

void validate_hurst(double h, bool sde_dependent) {
  if (!(h > 0.0) || !(h < 1.0))
    throw ValidationError("hurst: must lie strictly inside (0,1)");
  if (sde_dependent && !(h > 1.0 / 3.0))
    throw ValidationError(
        "hurst: pathwise solves need H > 1/3 (increment-only schemes)");
}

std::ofstream open_out(const std::string& dir, const std::string& name,
                       const std::string& meta) {
  fs::create_directories(dir);
  std::ofstream f(fs::path(dir) / name);
  if (!f) throw std::runtime_error("cannot open output file " + name);
  f << meta;
  return f;
}

std::string meta_header(const CommonConfig& cfg, const std::string& extra = {},
                        bool with_field = true) {
  std::ostringstream os;
  os << "# hurst: " << cfg.hurst << "\n# grid_n: " << cfg.grid_n
     << "\n# seed: " << cfg.seed << "\n";
  if (with_field) os << "# field: " << cfg.field << "\n";
  os << extra;
  return os.str();
}

// ---------------------------------------------------------------------------
// fbm-sim
// ---------------------------------------------------------------------------

struct FbmSimConfig : CommonConfig {
  int dim = 1;
  std::int64_t count = 10000;
  int export_paths = 8;
  FbmSimConfig() { grid_n = 16; }
};

void run_fbm_sim(const FbmSimConfig& cfg) {
  validate_hurst(cfg.hurst, false);
  const Hurst h(cfg.hurst);
  const TimeGrid grid(cfg.grid_n);
  fbm::PathSampler sampler(grid, h, cfg.dim, cfg.seed, 1);

  std::ostringstream extra;
  extra << "# dim: " << cfg.dim << "\n# count: " << cfg.count
        << "\n# jitter: " << sampler.gram().jitter_used << "\n";
  auto paths_csv = open_out(cfg.out_dir, "paths.csv",
                            meta_header(cfg, extra.str(), false));
  const int exported =
      static_cast<int>(std::min<std::int64_t>(cfg.export_paths, cfg.count));
  for (int i = 0; i < exported; ++i) {
    paths_csv << "# path " << i << "\n";
    fbm::write_path_csv(paths_csv, sampler.path(i));
  }

  // empirical covariance over all paths and components vs the exact values
  const int n = grid.steps();
  const std::int64_t chunk = 4096;
  const std::int64_t nchunks = (cfg.count + chunk - 1) / chunk;
  std::vector<Eigen::MatrixXd> partial(nchunks,
                                       Eigen::MatrixXd::Zero(n, n));
  parallel_for(nchunks, cfg.threads, [&](std::int64_t c) {
    Eigen::MatrixXd b(grid.nodes(), cfg.dim);
    const std::int64_t lo = c * chunk;
    const std::int64_t hi = std::min<std::int64_t>(cfg.count, lo + chunk);
    for (std::int64_t i = lo; i < hi; ++i) {
      sampler.path(i, b);
      for (int d = 0; d < cfg.dim; ++d)
        partial[c].selfadjointView<Eigen::Lower>().rankUpdate(
            b.col(d).tail(n), 1.0);
    }
  });
  Eigen::MatrixXd emp = Eigen::MatrixXd::Zero(n, n);
  for (const auto& p : partial) emp += p;
  const double draws = static_cast<double>(cfg.count) * cfg.dim;
  emp /= draws;

  auto cov_csv = open_out(cfg.out_dir, "cov_report.csv",
                          meta_header(cfg, extra.str(), false));
  cov_csv << "i,j,emp,exact,mcse,within_3se\n";
  char buf[192];
  for (int i = 0; i < n; ++i)
    for (int j = 0; j <= i; ++j) {
      const double exact = sampler.gram().matrix(i, j);
      const double mcse = std::sqrt(
          (sampler.gram().matrix(i, i) * sampler.gram().matrix(j, j) +
           exact * exact) /
          draws);
      const int ok = std::abs(emp(i, j) - exact) <= 3.0 * mcse ? 1 : 0;
      std::snprintf(buf, sizeof(buf), "%d,%d,%.17g,%.17g,%.17g,%d\n", i + 1,
                    j + 1, emp(i, j), exact, mcse, ok);
      cov_csv << buf;
    }
}

// ---------------------------------------------------------------------------
// distance
// ---------------------------------------------------------------------------

struct DistanceConfig : CommonConfig {
  std::vector<double> radii{0.5, 0.25, 0.1};
};

void run_distance(const DistanceConfig& cfg) {
  validate_hurst(cfg.hurst, false);
  const Hurst h(cfg.hurst);
  auto fields = registry_build(cfg.field, parse_params(cfg.field_params),
                               cfg.x.empty() ? 1 : static_cast<int>(cfg.x.size()));
  const Eigen::VectorXd x = cfg.x.empty()
                                ? Eigen::VectorXd::Zero(fields.state_dim)
                                : to_vec(cfg.x);
  std::vector<Eigen::VectorXd> dirs;
  for (int i = 0; i < fields.state_dim; ++i) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(fields.state_dim);
    e(i) = 1.0;
    dirs.push_back(e);
    dirs.push_back(-e);
  }
  dist::OptimizeOptions dopts;
  dopts.grid_n = cfg.grid_n;
  auto cells =
      dist::comparison_sweep(x, cfg.radii, dirs, fields, h, dopts, cfg.threads);

  double fitted_c = 1.0;
  for (const auto& c : cells)
    if (c.result.ratio > 0.0)
      fitted_c = std::max({fitted_c, c.result.ratio, 1.0 / c.result.ratio});
  std::ostringstream extra;
  extra << "# fitted_C: " << fitted_c << "\n";
  auto csv = open_out(cfg.out_dir, "distance_sweep.csv",
                      meta_header(cfg, extra.str()));
  dist::write_sweep_csv(csv, cells);

  svg::Plot plot;
  plot.title = "distance ratio vs radius";
  plot.xlabel = "radius (log10)";
  plot.ylabel = "optimized / |x-y|";
  plot.log_x = true;
  svg::Series pts;
  pts.line = false;
  for (const auto& c : cells) {
    pts.x.push_back(c.radius);
    pts.y.push_back(c.result.ratio);
  }
  plot.series.push_back(std::move(pts));
  plot.write((fs::path(cfg.out_dir) / "distance_sweep.svg").string());
}

// ---------------------------------------------------------------------------
// density
// ---------------------------------------------------------------------------

struct DensityConfig : CommonConfig {
  std::vector<double> t_list{0.5, 0.25, 0.125};
  std::int64_t count = 20000;
  bool varadhan = false;
  std::vector<double> y;
  DensityConfig() { grid_n = 128; }
};

void run_density(const DensityConfig& cfg) {
  validate_hurst(cfg.hurst, true);
  const Hurst h(cfg.hurst);
  auto fields = registry_build(cfg.field, parse_params(cfg.field_params),
                               cfg.x.empty() ? 1 : static_cast<int>(cfg.x.size()));
  const Eigen::VectorXd x = cfg.x.empty()
                                ? Eigen::VectorXd::Zero(fields.state_dim)
                                : to_vec(cfg.x);
  Eigen::VectorXd u = Eigen::VectorXd::Zero(fields.state_dim);
  u(0) = 1.0;

  auto res = dens::lower_bound_check(x, u, fields, h, cfg.t_list, cfg.count,
                                     cfg.seed, cfg.grid_n, cfg.threads);
  std::ostringstream extra;
  extra << "# count: " << cfg.count
        << "\n# note: the experiment certifies positivity and stability of "
           "phat*t^NH only; the constants in the bound are not identified\n";
  auto csv = open_out(cfg.out_dir, "density_lower_bound.csv",
                      meta_header(cfg, extra.str()));
  dens::write_lower_bound_csv(csv, res);

  svg::Plot plot;
  plot.title = "scaled density vs t";
  plot.xlabel = "t";
  plot.ylabel = "phat * t^NH";
  svg::Series line;
  for (const auto& row : res.rows) {
    line.x.push_back(row.t);
    line.y.push_back(row.scaled);
  }
  plot.series.push_back(std::move(line));
  plot.write((fs::path(cfg.out_dir) / "density_lower_bound.svg").string());

  if (cfg.varadhan) {
    const Eigen::VectorXd y =
        cfg.y.empty() ? Eigen::VectorXd::Constant(fields.state_dim, 0.25)
                      : to_vec(cfg.y);
    auto var = dens::varadhan_diagnostic(x, y, fields, h, cfg.t_list,
                                         cfg.count, cfg.seed, cfg.grid_n,
                                         cfg.threads);
    auto vcsv = open_out(cfg.out_dir, "varadhan.csv",
                         meta_header(cfg, extra.str()));
    dens::write_varadhan_csv(vcsv, var);
  }
}

}  // namespace

int run(const std::vector<std::string>& args) {
  CLI::App app{"fractional-noise flow toolkit: sampling, control distance, "
               "density experiments"};
  app.require_subcommand(1);
  app.set_config("--config");

  FbmSimConfig fbm_cfg;
  auto* fbm_cmd = app.add_subcommand("fbm-sim",
                                     "sample paths, check the covariance");
  add_common(fbm_cmd, fbm_cfg, false);
  fbm_cmd->add_option("--dim", fbm_cfg.dim, "path dimension");
  fbm_cmd->add_option("--count", fbm_cfg.count, "number of paths");
  fbm_cmd->add_option("--export-paths", fbm_cfg.export_paths,
                      "paths written to paths.csv");

  DistanceConfig dist_cfg;
  auto* dist_cmd = app.add_subcommand(
      "distance", "control distance vs Euclidean distance sweep");
  add_common(dist_cmd, dist_cfg, true);
  dist_cmd->add_option("--radii", dist_cfg.radii, "sweep radii in (0,1]")
      ->delimiter(',');

  DensityConfig dens_cfg;
  auto* dens_cmd = app.add_subcommand(
      "density", "small-time density lower-bound experiment");
  add_common(dens_cmd, dens_cfg, true);
  dens_cmd->add_option("--t-list", dens_cfg.t_list, "time horizons in (0,1]")
      ->delimiter(',');
  dens_cmd->add_option("--count", dens_cfg.count, "Monte Carlo samples");
  dens_cmd->add_flag("--varadhan", dens_cfg.varadhan,
                     "also emit the log-density diagnostic");
  dens_cmd->add_option("--y", dens_cfg.y, "diagnostic target point")
      ->delimiter(',');

  accept::Options verify_cfg;
  auto* verify_cmd =
      app.add_subcommand("verify", "run the full verification suite");
  verify_cmd->add_option("--seed", verify_cfg.seed, "RNG seed");
  verify_cmd->add_option("--threads", verify_cfg.threads, "worker cap");
  verify_cmd->add_option("--out-dir", verify_cfg.out_dir,
                         "output directory");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (*fbm_cmd) run_fbm_sim(fbm_cfg);
    if (*dist_cmd) run_distance(dist_cfg);
    if (*dens_cmd) run_density(dens_cfg);
    if (*verify_cmd) {
      auto results = accept::run_all(verify_cfg);
      accept::print_table(std::cout, results);
      if (!accept::all_passed(results)) return 3;
    }
  } catch (const ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

}  // namespace rde::cli
