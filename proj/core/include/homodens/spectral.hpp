#pragma once

// Fourier transform of a Hermite expansion and scale-separation inference.
//
// With F g(xi) = int g(x) e^{-2 pi i xi x} dx and psi_n eigenfunctions of F,
//
//   F rho_hat(xi) = sqrt(2 pi) sum_n (-i)^n alpha_n psi_n(2 pi xi).
//
// Fast-scale oscillations of wavelength L eps appear as a side peak at
// xi ~ 1/(L eps), so eps_hat = 1/(L xi_bar).

#include <complex>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

namespace homodens::spectral {

std::complex<double> ft_estimate(std::span<const double> coeffs, double xi);

struct FrequencyScan {
  std::vector<double> xi;
  std::vector<double> magnitude;  // |ft_estimate(coeffs, xi[i])|
  double exclusion_radius = 0.0;
};

FrequencyScan scan_spectrum(std::span<const double> coeffs, double xi_max, double grid_step,
                            double exclusion_radius);

struct Peak {
  double xi = 0.0;         // parabolic-refined location
  double magnitude = 0.0;  // parabolic-refined height
  double ratio = 0.0;      // magnitude / background
};

struct FrequencyAnalysis {
  FrequencyScan scan;
  double background = 0.0;
  double smooth_cutoff = 0.0;
  // Up to three strongest local maxima beyond the exclusion radius, strongest first.
  std::vector<Peak> top_peaks;
  // Strongest peak, present only when its ratio reaches kMinPeakRatio.
  std::optional<Peak> dominant;
};

inline constexpr double kMinPeakRatio = 2.0;

// The smooth density has genuine nonzero-frequency structure of its own (a
// bimodal density has a side lobe near 1 / well separation). A fast line must
// sit past that structure and carry a visible fraction of the mass.
struct SmoothCut {
  // Spectrum of the first `modes` coefficients (at most N/2) stands in for
  // the smooth part. 0 disables the cut.
  int modes = 16;
  // Both the cut level of the smooth spectrum and the minimum line height,
  // relative to |F rho_hat(0)|.
  double level = 0.1;
};

// Default scan limits for an N-mode expansion and fast period L.
double default_xi_max(int N);
double default_exclusion_radius(double L);

// Last xi on the grid where the smooth part still reaches cut.level of its
// zero-frequency value; 0 when disabled.
double smooth_cutoff(std::span<const double> coeffs, double xi_max, double grid_step, const SmoothCut& cut);

// Peaks are local maxima with xi >= exclusion_radius; background is the
// median magnitude over that range. The dominant peak is the strongest one that also clears the
// smooth cut and the ratio threshold.
FrequencyAnalysis dominant_frequency(std::span<const double> coeffs, double xi_max, double grid_step,
                                     double exclusion_radius, const SmoothCut& cut = {0, 0.0});
// Uses default_xi_max, default_exclusion_radius, grid_step = xi_max / 2048
// and the default SmoothCut.
FrequencyAnalysis dominant_frequency(std::span<const double> coeffs, double L);

// eps_hat = 1 / (L xi_bar).
double infer_eps(double xi_bar, double L);

// `xi,magnitude` CSV and the {xi_bar, eps_hat, peak_ratio} sidecar. Null
// fields in the sidecar mark a missing dominant frequency.
void write_scan_csv(const std::filesystem::path& path, const FrequencyScan& scan);
void write_scan_sidecar(const std::filesystem::path& path, const FrequencyAnalysis& analysis, double L);

}  // namespace homodens::spectral
