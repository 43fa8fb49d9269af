#include "homodens/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>

#include <json.hpp>

#include "homodens/basis.hpp"
#include "homodens/error.hpp"

namespace homodens::spectral {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// ft_estimate over many xi with one reusable basis row.
double magnitude_at(std::span<const double> coeffs, double xi, std::vector<double>& row) {
  basis::hermite_fn_row(kTwoPi * xi, row);
  // (-i)^n cycles through 1, -i, -1, i.
  double re = 0.0, im = 0.0;
  for (std::size_t n = 0; n < coeffs.size(); ++n) {
    const double v = coeffs[n] * row[n];
    switch (n % 4) {
      case 0: re += v; break;
      case 1: im -= v; break;
      case 2: re -= v; break;
      default: im += v; break;
    }
  }
  return std::sqrt(kTwoPi) * std::hypot(re, im);
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  if (v.size() % 2 == 1) return *mid;
  const double hi = *mid;
  const double lo = *std::max_element(v.begin(), mid);
  return 0.5 * (lo + hi);
}

}  // namespace

std::complex<double> ft_estimate(std::span<const double> coeffs, double xi) {
  if (coeffs.empty()) return {0.0, 0.0};
  std::vector<double> row(coeffs.size());
  basis::hermite_fn_row(kTwoPi * xi, row);
  std::complex<double> sum{0.0, 0.0};
  const std::complex<double> minus_i{0.0, -1.0};
  std::complex<double> phase{1.0, 0.0};
  for (std::size_t n = 0; n < coeffs.size(); ++n) {
    sum += phase * (coeffs[n] * row[n]);
    phase *= minus_i;
  }
  return std::sqrt(kTwoPi) * sum;
}

FrequencyScan scan_spectrum(std::span<const double> coeffs, double xi_max, double grid_step,
                            double exclusion_radius) {
  if (!(grid_step > 0.0)) throw ConfigError("grid_step", "frequency grid step must be positive");
  if (!(exclusion_radius > 0.0)) throw ConfigError("exclusion_radius", "exclusion radius must be positive");
  if (!(xi_max > exclusion_radius)) throw ConfigError("xi_max", "xi_max must exceed the exclusion radius");
  FrequencyScan scan;
  scan.exclusion_radius = exclusion_radius;
  const auto count = static_cast<std::size_t>(std::floor(xi_max / grid_step + 1e-9)) + 1;
  scan.xi.resize(count);
  scan.magnitude.resize(count);
  std::vector<double> row(std::max<std::size_t>(coeffs.size(), 1));
  for (std::size_t i = 0; i < count; ++i) {
    scan.xi[i] = static_cast<double>(i) * grid_step;
    scan.magnitude[i] = coeffs.empty() ? 0.0 : magnitude_at(coeffs, scan.xi[i], row);
  }
  return scan;
}

double default_xi_max(int N) {
  // psi_{N-1}(2 pi xi) is exponentially small past its turning point
  // sqrt(2N - 1), so nothing lives beyond xi ~ sqrt(2N)/(2 pi).
  return 1.25 * std::sqrt(2.0 * N + 1.0) / kTwoPi;
}

double default_exclusion_radius(double L) { return 0.5 / L; }

double smooth_cutoff(std::span<const double> coeffs, double xi_max, double grid_step, const SmoothCut& cut) {
  if (cut.modes <= 0 || coeffs.empty()) return 0.0;
  if (!(cut.level > 0.0 && cut.level < 1.0)) throw ConfigError("smooth_cut.level", "level must lie in (0, 1)");
  const auto m = std::min<std::size_t>(static_cast<std::size_t>(cut.modes), std::max<std::size_t>(coeffs.size() / 2, 1));
  const auto head = coeffs.first(m);
  std::vector<double> row(m);
  const double zero = magnitude_at(head, 0.0, row);
  double last = 0.0;
  for (double xi = 0.0; xi <= xi_max; xi += grid_step)
    if (magnitude_at(head, xi, row) >= cut.level * zero) last = xi;
  return last;
}

FrequencyAnalysis dominant_frequency(std::span<const double> coeffs, double xi_max, double grid_step,
                                     double exclusion_radius, const SmoothCut& cut) {
  FrequencyAnalysis out;
  out.scan = scan_spectrum(coeffs, xi_max, grid_step, exclusion_radius);
  out.smooth_cutoff = smooth_cutoff(coeffs, xi_max, grid_step, cut);
  const auto& xi = out.scan.xi;
  const auto& mag = out.scan.magnitude;
  std::size_t first = 0;
  while (first < xi.size() && xi[first] < exclusion_radius) ++first;

  std::vector<double> region(mag.begin() + static_cast<std::ptrdiff_t>(first), mag.end());
  out.background = median(region);

  std::vector<Peak> peaks;
  for (std::size_t i = first + 1; i + 1 < xi.size(); ++i) {
    if (!(mag[i] > mag[i - 1] && mag[i] >= mag[i + 1])) continue;
    const double y0 = mag[i - 1], y1 = mag[i], y2 = mag[i + 1];
    const double denom = y0 - 2.0 * y1 + y2;
    double delta = denom != 0.0 ? 0.5 * (y0 - y2) / denom : 0.0;
    delta = std::clamp(delta, -0.5, 0.5);
    Peak p;
    p.xi = xi[i] + delta * grid_step;
    p.magnitude = y1 - 0.25 * (y0 - y2) * delta;
    p.ratio = out.background > 0.0 ? p.magnitude / out.background : std::numeric_limits<double>::infinity();
    peaks.push_back(p);
  }
  std::sort(peaks.begin(), peaks.end(), [](const Peak& a, const Peak& b) { return a.magnitude > b.magnitude; });
  const double floor = cut.modes > 0 ? cut.level * mag.front() : 0.0;
  for (const auto& p : peaks) {
    if (p.xi < out.smooth_cutoff || p.magnitude < floor || p.ratio < kMinPeakRatio) continue;
    out.dominant = p;
    break;
  }
  if (peaks.size() > 3) peaks.resize(3);
  out.top_peaks = peaks;
  return out;
}

FrequencyAnalysis dominant_frequency(std::span<const double> coeffs, double L) {
  const double xi_max = default_xi_max(static_cast<int>(coeffs.size()));
  return dominant_frequency(coeffs, xi_max, xi_max / 2048.0, default_exclusion_radius(L), SmoothCut{});
}

double infer_eps(double xi_bar, double L) {
  if (!(xi_bar > 0.0)) throw ConfigError("xi_bar", "dominant frequency must be positive");
  if (!(L > 0.0)) throw ConfigError("L", "period L must be positive");
  return 1.0 / (L * xi_bar);
}

void write_scan_csv(const std::filesystem::path& path, const FrequencyScan& scan) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open scan file '" + path.string() + "' for writing");
  out << "xi,magnitude\n";
  char buf[80];
  for (std::size_t i = 0; i < scan.xi.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", scan.xi[i], scan.magnitude[i]);
    out << buf;
  }
  if (!out) throw IoError("write failed for scan file '" + path.string() + "'");
}

void write_scan_sidecar(const std::filesystem::path& path, const FrequencyAnalysis& analysis, double L) {
  nlohmann::json j;
  if (analysis.dominant) {
    j["xi_bar"] = analysis.dominant->xi;
    j["eps_hat"] = infer_eps(analysis.dominant->xi, L);
    j["peak_ratio"] = analysis.dominant->ratio;
  } else {
    j["xi_bar"] = nullptr;
    j["eps_hat"] = nullptr;
    j["peak_ratio"] = analysis.top_peaks.empty() ? nlohmann::json(nullptr) : nlohmann::json(analysis.top_peaks.front().ratio);
  }
  j["background"] = analysis.background;
  j["exclusion_radius"] = analysis.scan.exclusion_radius;
  j["smooth_cutoff"] = analysis.smooth_cutoff;
  auto peaks = nlohmann::json::array();
  for (const auto& p : analysis.top_peaks) peaks.push_back({{"xi", p.xi}, {"magnitude", p.magnitude}, {"ratio", p.ratio}});
  j["top_peaks"] = peaks;
  std::ofstream out(path);
  if (!out) throw IoError("cannot open sidecar '" + path.string() + "' for writing");
  out << j.dump(2) << '\n';
}

}  // namespace homodens::spectral
