#pragma once

// Hermite spectral estimator of an invariant density from a trajectory:
//
//   alpha_n = (1/T) int_0^T psi_n(X_t) dt,   rho_hat(x) = sum_{n<N} alpha_n psi_n(x)
//
// with the time integral taken as a left-Riemann sum on the simulation grid.
// In 2D the basis is the tensor product psi_m(x1) psi_n(x2) with the same N
// in both coordinates.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "homodens/model.hpp"
#include "homodens/numerics.hpp"
#include "homodens/sim.hpp"

namespace homodens::estimator {

struct EstimateMeta {
  double T = 0.0;
  std::optional<double> eps;
  double h = 0.0;
  std::uint64_t seed = 0;
  std::string potential;
};

struct SpectralEstimate {
  int dim = 1;
  int N = 0;
  // Length N (1D) or N*N row-major, coeffs[m * N + n] = alpha_mn (2D).
  std::vector<double> coeffs;
  EstimateMeta meta;

  double coeff(int n) const { return coeffs[static_cast<std::size_t>(n)]; }
  double coeff(int m, int n) const { return coeffs[static_cast<std::size_t>(m * N + n)]; }
  // Leading N' <= N modes; same trajectory, fewer terms.
  SpectralEstimate truncated(int n_modes) const;
};

// Partial sums s_n = sum_k w_k psi_n(X_k). Merging is associative and
// commutative up to floating-point reassociation.
class CoeffAccumulator {
 public:
  CoeffAccumulator(int N, int dim);

  void add(std::span<const double> state, double weight);
  void merge(const CoeffAccumulator& other);

  int N() const noexcept { return N_; }
  int dim() const noexcept { return dim_; }
  std::size_t count() const noexcept { return count_; }
  double total_weight() const noexcept { return total_weight_; }
  const std::vector<double>& sums() const noexcept { return sums_; }

  // alpha = s / sum(w). A stream whose states all carry zero weight (a single
  // state) falls back to the unweighted mean. Throws EmptyStreamError when no
  // state was added.
  SpectralEstimate finalize(const EstimateMeta& meta) const;

 private:
  int N_;
  int dim_;
  std::size_t count_ = 0;
  double total_weight_ = 0.0;
  std::vector<double> sums_;
  std::vector<double> unweighted_;
  std::vector<double> row1_;
  std::vector<double> row2_;
};

class CoeffObserver final : public sim::Observer {
 public:
  explicit CoeffObserver(int N, int dim = 1) : acc_(N, dim) {}
  void observe(double /*t*/, std::span<const double> state, double weight) override { acc_.add(state, weight); }

  const CoeffAccumulator& accumulator() const noexcept { return acc_; }
  CoeffAccumulator& accumulator() noexcept { return acc_; }
  SpectralEstimate finalize(const EstimateMeta& meta) const { return acc_.finalize(meta); }

 private:
  CoeffAccumulator acc_;
};

// Snapshots the running coefficients when the simulation clock reaches each
// checkpoint time, so one trajectory yields estimates at several horizons.
class CheckpointObserver final : public sim::Observer {
 public:
  CheckpointObserver(int N, int dim, std::vector<double> checkpoints);
  void observe(double t, std::span<const double> state, double weight) override;

  // Accumulators for horizons checkpoints[i]; states with t < checkpoint.
  const std::vector<CoeffAccumulator>& snapshots() const noexcept { return snapshots_; }
  const CoeffAccumulator& running() const noexcept { return acc_; }

 private:
  CoeffAccumulator acc_;
  std::vector<double> checkpoints_;
  std::vector<CoeffAccumulator> snapshots_;
};

// Truncated series; may be negative (no clipping).
double eval_density(const SpectralEstimate& est, double x);
double eval_density(const SpectralEstimate& est, double x1, double x2);

std::vector<double> eval_on_grid(const SpectralEstimate& est, const numerics::Grid1D& grid);
// Row-major over box.x1 x box.x2.
std::vector<double> eval_on_box(const SpectralEstimate& est, const numerics::Box2D& box);

// Display-only post-processing: clip at zero and renormalize on the grid.
std::vector<double> clip_and_renormalize(std::span<const double> values, const numerics::Grid1D& grid);

// Lower bound on gamma required by the convergence theorem for N(eps).
double gamma_min(double sigma2);

// zeta_min = 5 if r >= l, else 5 l / r. Infinite when l is infinite.
double zeta_min(double l, double r);

struct ModeSelection {
  double gamma = 0.0;
  double gamma_min = 0.0;
  double ratio = 0.0;  // pi^2 / (gamma L^2 eps^2)
  int N = 1;
  // The ratio fell below 1 and N was clamped up to 1.
  bool regime_violated = false;
};

struct TimeSelection {
  double zeta = 0.0;
  double zeta_min = 0.0;
  double kappa = 1.0;
  double T = 0.0;
  // The potential lies outside the Lipschitz assumption; zeta and T are not
  // defined and callers should use explicit values.
  bool formal = false;
};

// N = floor(pi^2 / (gamma L^2 eps^2)) with gamma = gamma_min(sigma2) * gamma_margin.
ModeSelection select_modes(double eps, double L, double sigma2, double gamma_margin);
ModeSelection select_modes_with_gamma(double eps, double L, double gamma);

// T = kappa eps^{-zeta} with zeta = zeta_min(l, r) * zeta_margin.
TimeSelection select_time(double eps, double l, double r, double kappa, double zeta_margin);

// alpha_n = int psi_n rho by adaptive quadrature, for n < N.
std::vector<double> quadrature_coeffs(const model::ReferenceDensity& density, int N, double tol = 1e-12);

// Coefficient file: {dim, N, T, eps, h, seed, potential, coeffs}.
void write_coefficients(const std::filesystem::path& path, const SpectralEstimate& est);
SpectralEstimate read_coefficients(const std::filesystem::path& path);
std::string coefficients_to_json(const SpectralEstimate& est);
SpectralEstimate coefficients_from_json(const std::string& text);

}  // namespace homodens::estimator
