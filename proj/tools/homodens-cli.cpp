#include <chrono>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "commands.hpp"
#include "config.hpp"
#include "experiments.hpp"
#include "manifest.hpp"

namespace cli = homodens::cli;
namespace fs = std::filesystem;

int main(int argc, char** argv) {
  CLI::App app{"Hermite spectral estimation of invariant densities of multiscale Langevin diffusions"};
  app.set_version_flag("--version", cli::tool_version());
  app.require_subcommand(1);

  fs::path config_path, out_dir, traj_path, coeff_path;
  bool binary = false, truth = false;
  std::optional<int> N;
  double L = 2.0 * 3.14159265358979323846;
  std::optional<double> xi_max, exclusion;
  std::string experiment;
  cli::ExperimentOptions xopts;

  auto* simulate = app.add_subcommand("simulate", "simulate a trajectory to <out>/trajectory.csv");
  simulate->add_option("-c,--config", config_path, "config JSON (or a manifest)")->required()->check(CLI::ExistingFile);
  simulate->add_option("-o,--out", out_dir, "output directory")->required();
  simulate->add_flag("--binary", binary, "raw float64 records instead of CSV");

  auto* estimate = app.add_subcommand("estimate", "Hermite coefficients and density on a grid");
  estimate->add_option("-c,--config", config_path, "config JSON; simulated in memory unless --trajectory is given")
      ->check(CLI::ExistingFile);
  estimate->add_option("-t,--trajectory", traj_path, "stored trajectory to estimate from")->check(CLI::ExistingFile);
  estimate->add_option("-N,--modes", N, "number of Hermite modes (overrides config N)");
  estimate->add_option("-o,--out", out_dir, "output directory")->required();
  estimate->add_flag("--truth", truth, "add rho and rho_eps columns and L2 errors");

  auto* infer = app.add_subcommand("infer-eps", "dominant frequency scan and eps_hat = 1/(L xi_bar)");
  infer->add_option("-i,--coefficients", coeff_path, "coefficient JSON from estimate")->required()->check(CLI::ExistingFile);
  infer->add_option("-L,--period", L, "fast period L")->capture_default_str();
  infer->add_option("--xi-max", xi_max, "upper end of the frequency scan");
  infer->add_option("--exclusion-radius", exclusion, "ignore peaks below this frequency");
  infer->add_option("-o,--out", out_dir, "output directory")->required();

  auto* exp = app.add_subcommand("experiment", "run a reference experiment grid");
  exp->add_option("name", experiment, "fig1, fig2 or fig3")->required()->check(CLI::IsMember({"fig1", "fig2", "fig3"}));
  exp->add_option("-o,--out", xopts.out_dir, "output directory")->required();
  exp->add_option("--scale-T", xopts.scale_T, "multiply every horizon T by this factor")->capture_default_str();
  exp->add_option("-j,--jobs", xopts.jobs, "parallel cells")->capture_default_str();
  exp->add_option("--seed", xopts.seed, "base seed")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? cli::kOk : cli::kConfigError;
  }

  try {
    if (*simulate) {
      cli::SimulateOptions o{cli::load_config(config_path), out_dir, binary};
      const auto r = cli::cmd_simulate(o);
      std::printf("%zu steps, %zu states, %.2f s -> %s\n", r.summary.steps, r.summary.observed, r.wall_seconds,
                  r.trajectory.string().c_str());
      return cli::kOk;
    }
    if (*estimate) {
      cli::EstimateOptions o;
      const bool have_traj = !traj_path.empty();
      if (!config_path.empty()) o.config = cli::load_config(config_path, !have_traj);
      if (have_traj) o.trajectory = traj_path;
      o.N = N;
      o.out_dir = out_dir;
      o.truth = truth;
      const auto r = cli::cmd_estimate(o);
      std::printf("N = %d, T = %g -> %s\n", r.estimate.N, r.estimate.meta.T, (out_dir / "coefficients.json").string().c_str());
      if (r.l2_rho) std::printf("L2 to rho %.6g, to rho_eps %.6g\n", *r.l2_rho, *r.l2_rho_eps);
      return cli::kOk;
    }
    if (*infer) {
      const auto r = cli::cmd_infer_eps({coeff_path, L, out_dir, xi_max, exclusion});
      if (!r.analysis.dominant) {
        std::fprintf(stderr,
                     "no dominant frequency: no peak past the smooth-density structure clears the detection "
                     "threshold; fast-scale oscillations only emerge for larger N\n");
        return cli::kNoDominantFrequency;
      }
      std::printf("xi_bar = %.6g, eps_hat = %.6g, peak ratio %.3g\n", r.analysis.dominant->xi, *r.eps_hat,
                  r.analysis.dominant->ratio);
      return cli::kOk;
    }
    if (*exp) {
      const auto start = std::chrono::steady_clock::now();
      if (experiment == "fig1") {
        const auto r = cli::run_fig1(xopts);
        for (const auto& c : r.cells)
          std::printf("T = %-6g N = %-3d L2(rho) = %.4f  L2(rho_eps) = %.4f\n", c.T, c.N, c.l2_rho, c.l2_rho_eps);
      } else if (experiment == "fig2") {
        const auto r = cli::run_fig2(xopts);
        for (const auto& c : r.cells) {
          if (c.eps_hat)
            std::printf("eps = %-6g N = %-3d eps_hat = %.4f\n", c.eps, c.N, *c.eps_hat);
          else
            std::printf("eps = %-6g N = %-3d no dominant frequency\n", c.eps, c.N);
        }
      } else {
        const auto r = cli::run_fig3(xopts);
        std::printf("T = %g L2(rho) = %.4f  L2(rho_eps) = %.4f, %zu local maxima\n", r.T, r.l2_rho, r.l2_rho_eps,
                    r.maxima.size());
      }
      std::printf("%.1f s -> %s\n", std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count(),
                  xopts.out_dir.string().c_str());
      return cli::kOk;
    }
  } catch (const std::exception& e) {
    return cli::report_error(e);
  }
  return cli::kFailure;
}
