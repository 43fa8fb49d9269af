#include "experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <mutex>
#include <thread>

#include "commands.hpp"
#include "config.hpp"
#include "homodens/error.hpp"
#include "homodens/estimator.hpp"
#include "homodens/sim.hpp"
#include "manifest.hpp"

namespace homodens::cli {

namespace fs = std::filesystem;

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

void check(const ExperimentOptions& opts) {
  if (!(opts.scale_T > 0.0)) throw ConfigError("scale-T", "--scale-T must be positive");
  if (opts.jobs < 1) throw ConfigError("jobs", "--jobs must be at least 1");
  if (!opts.out_dir.empty()) {
    std::error_code ec;
    fs::create_directories(opts.out_dir, ec);
    if (ec) throw IoError("cannot create output directory '" + opts.out_dir.string() + "'");
  }
}

RunConfig double_well(double eps, double T, std::uint64_t seed, int N) {
  RunConfig c;
  c.potential = "double-well";
  c.fast = "cos";
  c.eps = eps;
  c.sigma2 = 1.0;
  c.T = T;
  c.seed = seed;
  c.N = N;
  return c;
}

std::ofstream open_csv(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  return out;
}

nlohmann::json options_json(const std::string& name, const ExperimentOptions& opts) {
  return {{"experiment", name}, {"scale_T", opts.scale_T}, {"jobs", opts.jobs}, {"seed", opts.seed}};
}

}  // namespace

void parallel_cells(std::size_t count, int jobs, const std::function<void(std::size_t)>& fn) {
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex m;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      {
        std::lock_guard lock(m);
        if (failure) return;
      }
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(m);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const auto n = std::min<std::size_t>(static_cast<std::size_t>(std::max(jobs, 1)), count);
  if (n <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < n; ++t) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
}

const Fig1Cell& Fig1Result::at(double T, int N) const {
  for (const auto& c : cells)
    if (std::abs(c.T - T) <= 1e-9 * T && c.N == N) return c;
  throw RangeError("no fig1 cell for T=" + fmt(T) + ", N=" + std::to_string(N));
}

const Fig2Cell& Fig2Result::at(double eps, int N) const {
  for (const auto& c : cells)
    if (std::abs(c.eps - eps) <= 1e-12 && c.N == N) return c;
  throw RangeError("no fig2 cell for eps=" + fmt(eps) + ", N=" + std::to_string(N));
}

Fig1Result run_fig1(const ExperimentOptions& opts) {
  check(opts);
  const std::size_t nT = kFig1T.size(), nN = kFig1N.size();
  const int n_max = *std::max_element(kFig1N.begin(), kFig1N.end());
  Fig1Result out;
  out.cells.resize(nT * nN);
  std::vector<DensityTable> tables(nT * nN);

  // One trajectory per T row; every N is a truncation of it.
  parallel_cells(nT, opts.jobs, [&](std::size_t row) {
    const double T = kFig1T[row] * opts.scale_T;
    const auto seed = sim::derive_seed(opts.seed, row);
    auto cfg = double_well(0.1, T, seed, n_max);
    estimator::CoeffObserver obs(n_max);
    sim::Observer* o[] = {&obs};
    const auto summary = run_simulation(cfg, o);
    estimator::EstimateMeta meta{summary.T, cfg.eps, summary.h, seed, "double-well/cos"};
    const auto full = obs.finalize(meta);
    for (std::size_t col = 0; col < nN; ++col) {
      const auto k = row * nN + col;
      tables[k] = density_table(full.truncated(kFig1N[col]), cfg, true);
      out.cells[k] = {T, kFig1N[col], seed, tables[k].l2_rho, tables[k].l2_rho_eps};
    }
  });

  if (opts.out_dir.empty()) return out;
  Manifest manifest("experiment fig1", options_json("fig1", opts));
  const auto base = double_well(0.1, 1.0, 0, n_max);
  for (std::size_t k = 0; k < out.cells.size(); ++k) {
    const auto& c = out.cells[k];
    const auto path = opts.out_dir / ("density_T" + fmt(c.T) + "_N" + std::to_string(c.N) + ".csv");
    write_density_csv(path, tables[k], base, 1);
    manifest.add_output(path);
  }
  const auto summary = opts.out_dir / "summary.csv";
  {
    auto s = open_csv(summary);
    s << "T,N,seed,l2_rho,l2_rho_eps\n";
    char buf[160];
    for (const auto& c : out.cells) {
      std::snprintf(buf, sizeof buf, "%g,%d,%llu,%.17g,%.17g\n", c.T, c.N, static_cast<unsigned long long>(c.seed),
                    c.l2_rho, c.l2_rho_eps);
      s << buf;
    }
  }
  manifest.add_output(summary);
  for (const auto& c : out.cells)
    manifest.results()["cells"].push_back({{"T", c.T}, {"N", c.N}, {"l2_rho", c.l2_rho}, {"l2_rho_eps", c.l2_rho_eps}});
  manifest.results()["grid"] = {{"lo", base.grid.lo}, {"hi", base.grid.hi}, {"count", base.grid.count}};
  manifest.write(opts.out_dir);
  return out;
}

Fig2Result run_fig2(const ExperimentOptions& opts) {
  check(opts);
  const std::size_t nE = kFig2Eps.size(), nN = kFig2N.size();
  const int n_max = *std::max_element(kFig2N.begin(), kFig2N.end());
  const double L = 2.0 * 3.14159265358979323846;
  Fig2Result out;
  out.cells.resize(nE * nN);
  std::vector<spectral::FrequencyAnalysis> scans(nE * nN);
  std::vector<estimator::SpectralEstimate> estimates(nE);

  parallel_cells(nE, opts.jobs, [&](std::size_t row) {
    const double eps = kFig2Eps[row];
    const auto seed = sim::derive_seed(opts.seed, row);
    auto cfg = double_well(eps, kFig2T * opts.scale_T, seed, n_max);
    estimator::CoeffObserver obs(n_max);
    sim::Observer* o[] = {&obs};
    const auto summary = run_simulation(cfg, o);
    estimates[row] = obs.finalize({summary.T, eps, summary.h, seed, "double-well/cos"});
    for (std::size_t col = 0; col < nN; ++col) {
      const auto k = row * nN + col;
      scans[k] = spectral::dominant_frequency(estimates[row].truncated(kFig2N[col]).coeffs, L);
      auto& c = out.cells[k];
      c = {eps, kFig2N[col], seed, std::nullopt, std::nullopt, 0.0};
      if (!scans[k].top_peaks.empty()) c.peak_ratio = scans[k].top_peaks.front().ratio;
      if (scans[k].dominant) {
        c.xi_bar = scans[k].dominant->xi;
        c.eps_hat = spectral::infer_eps(*c.xi_bar, L);
        c.peak_ratio = scans[k].dominant->ratio;
      }
    }
  });

  if (opts.out_dir.empty()) return out;
  Manifest manifest("experiment fig2", options_json("fig2", opts));
  for (std::size_t row = 0; row < nE; ++row) {
    const auto path = opts.out_dir / ("coefficients_eps" + fmt(kFig2Eps[row]) + ".json");
    estimator::write_coefficients(path, estimates[row]);
    manifest.add_output(path);
  }
  for (std::size_t k = 0; k < out.cells.size(); ++k) {
    const auto& c = out.cells[k];
    const auto stem = "scan_eps" + fmt(c.eps) + "_N" + std::to_string(c.N);
    spectral::write_scan_csv(opts.out_dir / (stem + ".csv"), scans[k].scan);
    spectral::write_scan_sidecar(opts.out_dir / (stem + ".json"), scans[k], L);
    manifest.add_output(opts.out_dir / (stem + ".csv"));
    manifest.add_output(opts.out_dir / (stem + ".json"));
  }
  const auto summary = opts.out_dir / "summary.csv";
  {
    auto s = open_csv(summary);
    s << "eps,N,seed,xi_bar,eps_hat,peak_ratio\n";
    char buf[200];
    for (const auto& c : out.cells) {
      if (c.xi_bar)
        std::snprintf(buf, sizeof buf, "%g,%d,%llu,%.17g,%.17g,%.17g\n", c.eps, c.N,
                      static_cast<unsigned long long>(c.seed), *c.xi_bar, *c.eps_hat, c.peak_ratio);
      else
        std::snprintf(buf, sizeof buf, "%g,%d,%llu,,,%.17g\n", c.eps, c.N, static_cast<unsigned long long>(c.seed),
                      c.peak_ratio);
      s << buf;
    }
  }
  manifest.add_output(summary);
  for (const auto& c : out.cells)
    manifest.results()["cells"].push_back({{"eps", c.eps},
                                           {"N", c.N},
                                           {"eps_hat", c.eps_hat ? nlohmann::json(*c.eps_hat) : nlohmann::json(nullptr)}});
  manifest.write(opts.out_dir);
  return out;
}

std::vector<GridPoint> local_maxima(const std::vector<double>& v, const numerics::Box2D& box) {
  const std::size_t n1 = box.x1.count, n2 = box.x2.count;
  std::vector<GridPoint> out;
  for (std::size_t i = 1; i + 1 < n1; ++i)
    for (std::size_t j = 1; j + 1 < n2; ++j) {
      const double c = v[i * n2 + j];
      bool peak = true;
      for (int di = -1; di <= 1 && peak; ++di)
        for (int dj = -1; dj <= 1; ++dj) {
          if (di == 0 && dj == 0) continue;
          if (v[(i + di) * n2 + (j + dj)] >= c) {
            peak = false;
            break;
          }
        }
      if (peak) out.push_back({box.x1.point(i), box.x2.point(j), c});
    }
  std::sort(out.begin(), out.end(), [](const GridPoint& a, const GridPoint& b) { return a.value > b.value; });
  return out;
}

Fig3Result run_fig3(const ExperimentOptions& opts) {
  check(opts);
  RunConfig cfg;
  cfg.potential = "2d-example";
  cfg.eps = 0.1;
  cfg.sigma2 = kFig3Sigma2;
  cfg.T = kFig3T * opts.scale_T;
  cfg.seed = sim::derive_seed(opts.seed, 0);
  cfg.N = kFig3N;
  cfg.grid = {-2.0, 2.0, 201};

  estimator::CoeffObserver obs(cfg.N, 2);
  sim::Observer* o[] = {&obs};
  const auto summary = run_simulation(cfg, o);
  const auto est = obs.finalize({summary.T, cfg.eps, summary.h, cfg.seed, cfg.potential});
  const auto table = density_table(est, cfg, true);

  Fig3Result out;
  out.seed = cfg.seed;
  out.T = cfg.T;
  out.l2_rho = table.l2_rho;
  out.l2_rho_eps = table.l2_rho_eps;
  out.maxima = local_maxima(table.rho_hat, cfg.grid_2d());

  if (opts.out_dir.empty()) return out;
  Manifest manifest("experiment fig3", options_json("fig3", opts));
  manifest.results()["config"] = to_json(cfg);
  const auto coeffs = opts.out_dir / "coefficients.json";
  estimator::write_coefficients(coeffs, est);
  manifest.add_output(coeffs);
  const auto csv = opts.out_dir / "density.csv";
  write_density_csv(csv, table, cfg, 2);
  manifest.add_output(csv);
  manifest.results()["l2_rho"] = out.l2_rho;
  manifest.results()["l2_rho_eps"] = out.l2_rho_eps;
  for (const auto& m : out.maxima) manifest.results()["maxima"].push_back({m.x1, m.x2, m.value});
  manifest.write(opts.out_dir);
  return out;
}

}  // namespace homodens::cli
