#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "config.hpp"
#include "homodens/estimator.hpp"
#include "homodens/numerics.hpp"
#include "homodens/sim.hpp"
#include "homodens/spectral.hpp"

namespace homodens::cli {

enum ExitCode : int { kOk = 0, kFailure = 1, kConfigError = 2, kNumericalFailure = 3, kNoDominantFrequency = 4 };

struct SimulateOptions {
  RunConfig config;
  std::filesystem::path out_dir;
  bool binary = false;
};

struct SimulateResult {
  sim::SimSummary summary;
  std::filesystem::path trajectory;
  double wall_seconds = 0.0;
};

SimulateResult cmd_simulate(const SimulateOptions& opts);

struct EstimateOptions {
  // At least one of config / trajectory. Without a trajectory the config is
  // simulated in memory and never written out.
  std::optional<RunConfig> config;
  std::optional<std::filesystem::path> trajectory;
  std::optional<int> N;  // overrides config.N
  std::filesystem::path out_dir;
  bool truth = false;  // needs config
};

struct EstimateResult {
  estimator::SpectralEstimate estimate;
  std::optional<double> l2_rho;
  std::optional<double> l2_rho_eps;
};

EstimateResult cmd_estimate(const EstimateOptions& opts);

struct InferOptions {
  std::filesystem::path coefficients;
  double L = 2.0 * 3.14159265358979323846;
  std::filesystem::path out_dir;
  std::optional<double> xi_max;
  std::optional<double> exclusion_radius;
};

struct InferResult {
  spectral::FrequencyAnalysis analysis;
  std::optional<double> eps_hat;
};

// Missing dominant frequency is reported through analysis.dominant, not thrown.
InferResult cmd_infer_eps(const InferOptions& opts);

// Streams a simulation of `cfg` into the given observers. 1D homogenized mode
// computes K on the fly.
sim::SimSummary run_simulation(const RunConfig& cfg, std::span<sim::Observer* const> observers);

// Densities on the config grid. 1D: x,rho_hat[,rho,rho_eps]. 2D: row-major
// x1,x2,rho_hat[,rho,rho_eps]. Returns L2 errors when truth is requested.
struct DensityTable {
  std::vector<double> rho_hat;
  std::vector<double> rho;
  std::vector<double> rho_eps;
  double l2_rho = 0.0;
  double l2_rho_eps = 0.0;
};

DensityTable density_table(const estimator::SpectralEstimate& est, const RunConfig& cfg, bool truth);
void write_density_csv(const std::filesystem::path& path, const DensityTable& table, const RunConfig& cfg,
                       int dim);

// Maps an exception to its exit code and prints a one-line diagnosis.
int report_error(const std::exception& e);

}  // namespace homodens::cli
