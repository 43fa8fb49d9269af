#include "commands.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <string>

#include "homodens/error.hpp"
#include "homodens/model.hpp"
#include "manifest.hpp"

namespace homodens::cli {

namespace fs = std::filesystem;

namespace {

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory '" + dir.string() + "': " + ec.message());
}

estimator::EstimateMeta meta_for(const RunConfig& cfg, const sim::SimSummary& s) {
  estimator::EstimateMeta m;
  m.T = s.T;
  m.eps = cfg.eps;
  m.h = s.h;
  m.seed = s.seed;
  m.potential = cfg.is_2d() ? cfg.potential : cfg.potential + "/" + cfg.fast;
  return m;
}

nlohmann::json summary_json(const sim::SimSummary& s) {
  nlohmann::json j;
  j["steps"] = s.steps;
  j["observed"] = s.observed;
  j["h"] = s.h;
  j["T"] = s.T;
  j["seed"] = s.seed;
  j["min_state"] = s.min_state;
  j["max_state"] = s.max_state;
  j["horizon_truncated"] = s.horizon_truncated;
  j["warnings"] = s.warnings;
  return j;
}

void warn(const sim::SimSummary& s) {
  for (const auto& w : s.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
}

}  // namespace

sim::SimSummary run_simulation(const RunConfig& cfg, std::span<sim::Observer* const> observers) {
  if (cfg.is_2d()) return sim::euler_maruyama(cfg.problem_2d(), cfg.sim_config(), observers);
  const auto spec = cfg.problem();
  if (cfg.mode == sim::Mode::Homogenized) {
    const auto hom = model::homogenize(spec.fast(), spec.sigma2());
    return sim::euler_maruyama(spec, cfg.sim_config(), cfg.mode, observers, &hom);
  }
  return sim::euler_maruyama(spec, cfg.sim_config(), cfg.mode, observers);
}

SimulateResult cmd_simulate(const SimulateOptions& opts) {
  const auto& cfg = opts.config;
  ensure_dir(opts.out_dir);
  SimulateResult r;
  r.trajectory = opts.out_dir / (opts.binary ? "trajectory.bin" : "trajectory.csv");
  Manifest manifest("simulate", to_json(cfg));

  sim::TrajectoryHeader header;
  header.dim = cfg.dim();
  header.h = cfg.step();
  header.seed = cfg.seed;
  header.mode = cfg.mode;
  const auto start = std::chrono::steady_clock::now();
  {
    sim::TrajectoryWriter writer(r.trajectory, header, opts.binary ? sim::Encoding::Raw : sim::Encoding::Csv);
    sim::Observer* obs[] = {&writer};
    r.summary = run_simulation(cfg, obs);
    writer.close();
  }
  r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  warn(r.summary);

  manifest.add_output(r.trajectory);
  manifest.results() = summary_json(r.summary);
  manifest.results()["wall_seconds"] = r.wall_seconds;
  manifest.write(opts.out_dir);
  return r;
}

DensityTable density_table(const estimator::SpectralEstimate& est, const RunConfig& cfg, bool truth) {
  DensityTable t;
  if (est.dim == 1) {
    const auto grid = cfg.grid_1d();
    t.rho_hat = estimator::eval_on_grid(est, grid);
    if (!truth) return t;
    const auto spec = cfg.problem();
    const auto rho = model::reference_density(spec, model::DensityKind::Homogenized);
    const auto rho_eps = model::reference_density(spec, model::DensityKind::Multiscale);
    t.rho.resize(grid.count);
    t.rho_eps.resize(grid.count);
    for (std::size_t i = 0; i < grid.count; ++i) {
      t.rho[i] = rho(grid.point(i));
      t.rho_eps[i] = rho_eps(grid.point(i));
    }
    t.l2_rho = numerics::l2_error(t.rho_hat, t.rho, grid);
    t.l2_rho_eps = numerics::l2_error(t.rho_hat, t.rho_eps, grid);
    return t;
  }
  const auto box = cfg.grid_2d();
  t.rho_hat = estimator::eval_on_box(est, box);
  if (!truth) return t;
  const auto spec = cfg.problem_2d();
  const auto rho = model::reference_density(spec, model::DensityKind::Homogenized);
  const auto rho_eps = model::reference_density(spec, model::DensityKind::Multiscale);
  const std::size_t n1 = box.x1.count, n2 = box.x2.count;
  t.rho.resize(n1 * n2);
  t.rho_eps.resize(n1 * n2);
  for (std::size_t i = 0; i < n1; ++i)
    for (std::size_t j = 0; j < n2; ++j) {
      t.rho[i * n2 + j] = rho(box.x1.point(i), box.x2.point(j));
      t.rho_eps[i * n2 + j] = rho_eps(box.x1.point(i), box.x2.point(j));
    }
  t.l2_rho = numerics::l2_error(t.rho_hat, t.rho, box);
  t.l2_rho_eps = numerics::l2_error(t.rho_hat, t.rho_eps, box);
  return t;
}

void write_density_csv(const fs::path& path, const DensityTable& t, const RunConfig& cfg, int dim) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  const bool truth = !t.rho.empty();
  char buf[160];
  if (dim == 1) {
    out << (truth ? "x,rho_hat,rho,rho_eps\n" : "x,rho_hat\n");
    const auto grid = cfg.grid_1d();
    for (std::size_t i = 0; i < grid.count; ++i) {
      if (truth)
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g\n", grid.point(i), t.rho_hat[i], t.rho[i], t.rho_eps[i]);
      else
        std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", grid.point(i), t.rho_hat[i]);
      out << buf;
    }
  } else {
    out << (truth ? "x1,x2,rho_hat,rho,rho_eps\n" : "x1,x2,rho_hat\n");
    const auto box = cfg.grid_2d();
    const std::size_t n2 = box.x2.count;
    for (std::size_t i = 0; i < box.x1.count; ++i)
      for (std::size_t j = 0; j < n2; ++j) {
        const std::size_t k = i * n2 + j;
        if (truth)
          std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g\n", box.x1.point(i), box.x2.point(j),
                        t.rho_hat[k], t.rho[k], t.rho_eps[k]);
        else
          std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", box.x1.point(i), box.x2.point(j), t.rho_hat[k]);
        out << buf;
      }
  }
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

EstimateResult cmd_estimate(const EstimateOptions& opts) {
  if (!opts.config && !opts.trajectory) throw ConfigError("config", "estimate needs a config or a trajectory");
  if (opts.truth && !opts.config) throw ConfigError("truth", "--truth needs a config describing the potentials");
  if (opts.N && *opts.N < 1) throw ConfigError("N", "N must be at least 1");

  RunConfig cfg = opts.config ? *opts.config : RunConfig{};
  if (opts.N) cfg.N = *opts.N;
  ensure_dir(opts.out_dir);

  EstimateResult r;
  nlohmann::json sim_info;
  if (opts.trajectory) {
    sim::TrajectoryReader probe(*opts.trajectory);
    const auto header = probe.header();
    if (opts.config && header.dim != cfg.dim())
      throw ConfigError("trajectory", "trajectory dimension does not match the config potential");
    if (!opts.config && header.dim == 2) cfg.grid = {-2.0, 2.0, 201};
    estimator::CoeffObserver obs(cfg.N, header.dim);
    sim::Observer* o[] = {&obs};
    const std::size_t rows = sim::replay(*opts.trajectory, o);
    estimator::EstimateMeta meta;
    meta.h = header.h;
    meta.seed = header.seed;
    meta.T = header.h * static_cast<double>(rows > 0 ? rows - 1 : 0);
    if (opts.config) {
      meta.eps = cfg.eps;
      meta.potential = cfg.is_2d() ? cfg.potential : cfg.potential + "/" + cfg.fast;
    }
    r.estimate = obs.finalize(meta);
    sim_info = {{"trajectory", fs::absolute(*opts.trajectory).string()}, {"rows", rows}};
  } else {
    estimator::CoeffObserver obs(cfg.N, cfg.dim());
    sim::Observer* o[] = {&obs};
    const auto summary = run_simulation(cfg, o);
    warn(summary);
    r.estimate = obs.finalize(meta_for(cfg, summary));
    sim_info = summary_json(summary);
  }

  nlohmann::json snapshot = to_json(cfg);
  if (!opts.config)
    snapshot = {{"N", cfg.N}, {"grid", {{"lo", cfg.grid.lo}, {"hi", cfg.grid.hi}, {"count", cfg.grid.count}}}};
  Manifest manifest("estimate", snapshot);
  const auto coeff_path = opts.out_dir / "coefficients.json";
  estimator::write_coefficients(coeff_path, r.estimate);
  manifest.add_output(coeff_path);

  const auto table = density_table(r.estimate, cfg, opts.truth);
  const auto csv = opts.out_dir / "density.csv";
  write_density_csv(csv, table, cfg, r.estimate.dim);
  manifest.add_output(csv);

  manifest.results()["simulation"] = sim_info;
  if (opts.truth) {
    r.l2_rho = table.l2_rho;
    r.l2_rho_eps = table.l2_rho_eps;
    manifest.results()["l2_rho"] = table.l2_rho;
    manifest.results()["l2_rho_eps"] = table.l2_rho_eps;
  }
  manifest.write(opts.out_dir);
  return r;
}

InferResult cmd_infer_eps(const InferOptions& opts) {
  if (!(opts.L > 0.0)) throw ConfigError("L", "period L must be positive");
  const auto est = estimator::read_coefficients(opts.coefficients);
  if (est.dim != 1) throw ConfigError("coefficients", "frequency inference needs a 1D coefficient file");
  ensure_dir(opts.out_dir);

  InferResult r;
  if (opts.xi_max || opts.exclusion_radius) {
    const double xi_max = opts.xi_max.value_or(spectral::default_xi_max(est.N));
    r.analysis = spectral::dominant_frequency(est.coeffs, xi_max, xi_max / 2048.0,
                                              opts.exclusion_radius.value_or(spectral::default_exclusion_radius(opts.L)),
                                              spectral::SmoothCut{});
  } else {
    r.analysis = spectral::dominant_frequency(est.coeffs, opts.L);
  }
  if (r.analysis.dominant) r.eps_hat = spectral::infer_eps(r.analysis.dominant->xi, opts.L);

  nlohmann::json cfg = {{"coefficients", fs::absolute(opts.coefficients).string()},
                        {"L", opts.L},
                        {"N", est.N},
                        {"xi_max", r.analysis.scan.xi.empty() ? 0.0 : r.analysis.scan.xi.back()},
                        {"exclusion_radius", r.analysis.scan.exclusion_radius}};
  Manifest manifest("infer-eps", cfg);
  const auto csv = opts.out_dir / "scan.csv";
  const auto side = opts.out_dir / "scan.json";
  spectral::write_scan_csv(csv, r.analysis.scan);
  spectral::write_scan_sidecar(side, r.analysis, opts.L);
  manifest.add_output(csv);
  manifest.add_output(side);
  manifest.results()["xi_bar"] = r.analysis.dominant ? nlohmann::json(r.analysis.dominant->xi) : nlohmann::json(nullptr);
  manifest.results()["eps_hat"] = r.eps_hat ? nlohmann::json(*r.eps_hat) : nlohmann::json(nullptr);
  manifest.write(opts.out_dir);
  return r;
}

int report_error(const std::exception& e) {
  if (const auto* c = dynamic_cast<const ConfigError*>(&e)) {
    std::fprintf(stderr, "config error [%s]: %s\n", c->field().c_str(), c->what());
    return kConfigError;
  }
  if (dynamic_cast<const IoError*>(&e)) {
    std::fprintf(stderr, "io error: %s\n", e.what());
    return kConfigError;
  }
  if (dynamic_cast<const NumericalError*>(&e) || dynamic_cast<const DivergenceError*>(&e) ||
      dynamic_cast<const RangeError*>(&e) || dynamic_cast<const EmptyStreamError*>(&e)) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return kNumericalFailure;
  }
  std::fprintf(stderr, "error: %s\n", e.what());
  return kFailure;
}

}  // namespace homodens::cli
