#pragma once

// The three reference experiments as parameter grids. Cells run in parallel up to
// `jobs`; each cell's seed is derive_seed(seed, cell index). Within a cell
// one trajectory serves every N (the estimates are nested truncations).

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "homodens/numerics.hpp"
#include "homodens/spectral.hpp"

namespace homodens::cli {

struct ExperimentOptions {
  std::filesystem::path out_dir;  // empty: compute only, write nothing
  double scale_T = 1.0;
  int jobs = 1;
  std::uint64_t seed = 1;
};

struct Fig1Cell {
  double T = 0.0;
  int N = 0;
  std::uint64_t seed = 0;
  double l2_rho = 0.0;
  double l2_rho_eps = 0.0;
};

struct Fig1Result {
  std::vector<Fig1Cell> cells;  // T-major over {50, 500, 5000} x {4, 16, 64}
  const Fig1Cell& at(double T, int N) const;
};

struct Fig2Cell {
  double eps = 0.0;
  int N = 0;
  std::uint64_t seed = 0;
  std::optional<double> xi_bar;
  std::optional<double> eps_hat;
  double peak_ratio = 0.0;  // of the strongest peak past the exclusion radius
};

struct Fig2Result {
  std::vector<Fig2Cell> cells;  // eps-major over {0.075, 0.1, 0.125} x {30, 60, 90}
  const Fig2Cell& at(double eps, int N) const;
};

struct GridPoint {
  double x1 = 0.0;
  double x2 = 0.0;
  double value = 0.0;
};

struct Fig3Result {
  std::uint64_t seed = 0;
  double T = 0.0;
  double l2_rho = 0.0;
  double l2_rho_eps = 0.0;
  std::vector<GridPoint> maxima;  // strict interior local maxima of rho_hat, largest first
};

// Shared settings: sigma2 = 1, eps = 0.1, h = eps^3, double well with cos.
inline const std::vector<double> kFig1T = {50.0, 500.0, 5000.0};
inline const std::vector<int> kFig1N = {4, 16, 64};
inline const std::vector<double> kFig2Eps = {0.075, 0.1, 0.125};
inline const std::vector<int> kFig2N = {30, 60, 90};
inline constexpr double kFig2T = 1000.0;
inline constexpr double kFig3T = 2000.0;
inline constexpr double kFig3Sigma2 = 2.25;
inline constexpr int kFig3N = 16;

Fig1Result run_fig1(const ExperimentOptions& opts);
Fig2Result run_fig2(const ExperimentOptions& opts);
Fig3Result run_fig3(const ExperimentOptions& opts);

// Runs fn(0..count-1) on up to `jobs` threads; rethrows the first failure.
void parallel_cells(std::size_t count, int jobs, const std::function<void(std::size_t)>& fn);

// Strict local maxima (all 8 neighbours lower) of row-major samples on a box.
std::vector<GridPoint> local_maxima(const std::vector<double>& values, const numerics::Box2D& box);

}  // namespace homodens::cli
