#include "homodens/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "homodens/basis.hpp"
#include "homodens/error.hpp"

namespace homodens::estimator {

namespace {

constexpr double kPi = std::numbers::pi;

std::size_t coeff_count(int N, int dim) {
  const auto n = static_cast<std::size_t>(N);
  return dim == 1 ? n : n * n;
}

}  // namespace

SpectralEstimate SpectralEstimate::truncated(int n_modes) const {
  if (n_modes < 1 || n_modes > N) throw ConfigError("N", "truncation must keep between 1 and N modes");
  SpectralEstimate out{dim, n_modes, {}, meta};
  if (dim == 1) {
    out.coeffs.assign(coeffs.begin(), coeffs.begin() + n_modes);
  } else {
    out.coeffs.reserve(static_cast<std::size_t>(n_modes * n_modes));
    for (int m = 0; m < n_modes; ++m) {
      for (int n = 0; n < n_modes; ++n) out.coeffs.push_back(coeff(m, n));
    }
  }
  return out;
}

CoeffAccumulator::CoeffAccumulator(int N, int dim) : N_(N), dim_(dim) {
  if (N < 1) throw ConfigError("N", "number of modes N must be >= 1");
  if (dim != 1 && dim != 2) throw ConfigError("dim", "dimension must be 1 or 2");
  sums_.assign(coeff_count(N, dim), 0.0);
  unweighted_.assign(coeff_count(N, dim), 0.0);
  row1_.resize(static_cast<std::size_t>(N));
  row2_.resize(dim == 2 ? static_cast<std::size_t>(N) : 0);
}

void CoeffAccumulator::add(std::span<const double> state, double weight) {
  if (state.size() != static_cast<std::size_t>(dim_)) {
    throw ConfigError("dim", "state dimension does not match the estimator");
  }
  // Unweighted sums are only needed while every weight so far is zero.
  const bool track_unweighted = total_weight_ == 0.0;
  basis::hermite_fn_row(state[0], row1_);
  const auto N = static_cast<std::size_t>(N_);
  if (dim_ == 1) {
    if (weight != 0.0) {
      for (std::size_t n = 0; n < N; ++n) sums_[n] += weight * row1_[n];
    }
    if (track_unweighted) {
      for (std::size_t n = 0; n < N; ++n) unweighted_[n] += row1_[n];
    }
  } else {
    basis::hermite_fn_row(state[1], row2_);
    for (std::size_t m = 0; m < N; ++m) {
      const double a = weight * row1_[m];
      double* s = sums_.data() + m * N;
      if (weight != 0.0) {
        for (std::size_t n = 0; n < N; ++n) s[n] += a * row2_[n];
      }
      if (track_unweighted) {
        double* u = unweighted_.data() + m * N;
        for (std::size_t n = 0; n < N; ++n) u[n] += row1_[m] * row2_[n];
      }
    }
  }
  total_weight_ += weight;
  ++count_;
}

void CoeffAccumulator::merge(const CoeffAccumulator& other) {
  if (other.N_ != N_ || other.dim_ != dim_) throw ConfigError("N", "cannot merge accumulators of different shape");
  for (std::size_t i = 0; i < sums_.size(); ++i) {
    sums_[i] += other.sums_[i];
    unweighted_[i] += other.unweighted_[i];
  }
  total_weight_ += other.total_weight_;
  count_ += other.count_;
}

SpectralEstimate CoeffAccumulator::finalize(const EstimateMeta& meta) const {
  if (count_ == 0) throw EmptyStreamError("cannot finalize coefficients: no state was observed");
  SpectralEstimate est{dim_, N_, std::vector<double>(sums_.size()), meta};
  if (total_weight_ > 0.0) {
    for (std::size_t i = 0; i < sums_.size(); ++i) est.coeffs[i] = sums_[i] / total_weight_;
  } else {
    for (std::size_t i = 0; i < sums_.size(); ++i) est.coeffs[i] = unweighted_[i] / static_cast<double>(count_);
  }
  return est;
}

CheckpointObserver::CheckpointObserver(int N, int dim, std::vector<double> checkpoints)
    : acc_(N, dim), checkpoints_(std::move(checkpoints)) {
  std::sort(checkpoints_.begin(), checkpoints_.end());
  snapshots_.reserve(checkpoints_.size());
}

void CheckpointObserver::observe(double t, std::span<const double> state, double weight) {
  while (snapshots_.size() < checkpoints_.size()) {
    const double cp = checkpoints_[snapshots_.size()];
    if (t < cp * (1.0 - 1e-12)) break;
    snapshots_.push_back(acc_);
  }
  acc_.add(state, weight);
}

double eval_density(const SpectralEstimate& est, double x) {
  if (est.dim != 1) throw ConfigError("dim", "1D evaluation of a 2D estimate");
  std::vector<double> row(static_cast<std::size_t>(est.N));
  basis::hermite_fn_row(x, row);
  double s = 0.0;
  for (std::size_t n = 0; n < row.size(); ++n) s += est.coeffs[n] * row[n];
  return s;
}

double eval_density(const SpectralEstimate& est, double x1, double x2) {
  if (est.dim != 2) throw ConfigError("dim", "2D evaluation of a 1D estimate");
  const auto N = static_cast<std::size_t>(est.N);
  std::vector<double> r1(N), r2(N);
  basis::hermite_fn_row(x1, r1);
  basis::hermite_fn_row(x2, r2);
  double s = 0.0;
  for (std::size_t m = 0; m < N; ++m) {
    double inner = 0.0;
    for (std::size_t n = 0; n < N; ++n) inner += est.coeffs[m * N + n] * r2[n];
    s += r1[m] * inner;
  }
  return s;
}

std::vector<double> eval_on_grid(const SpectralEstimate& est, const numerics::Grid1D& grid) {
  std::vector<double> out(grid.count);
  for (std::size_t i = 0; i < grid.count; ++i) out[i] = eval_density(est, grid.point(i));
  return out;
}

std::vector<double> eval_on_box(const SpectralEstimate& est, const numerics::Box2D& box) {
  if (est.dim != 2) throw ConfigError("dim", "2D evaluation of a 1D estimate");
  const auto N = static_cast<std::size_t>(est.N);
  const std::size_t n1 = box.x1.count;
  const std::size_t n2 = box.x2.count;
  // Precompute basis rows along both axes, then contract.
  std::vector<double> rows1(n1 * N), rows2(n2 * N);
  for (std::size_t i = 0; i < n1; ++i) basis::hermite_fn_row(box.x1.point(i), std::span(rows1).subspan(i * N, N));
  for (std::size_t j = 0; j < n2; ++j) basis::hermite_fn_row(box.x2.point(j), std::span(rows2).subspan(j * N, N));
  // tmp[i][n] = sum_m psi_m(x1_i) alpha_mn
  std::vector<double> tmp(n1 * N, 0.0);
  for (std::size_t i = 0; i < n1; ++i) {
    for (std::size_t m = 0; m < N; ++m) {
      const double a = rows1[i * N + m];
      for (std::size_t n = 0; n < N; ++n) tmp[i * N + n] += a * est.coeffs[m * N + n];
    }
  }
  std::vector<double> out(n1 * n2);
  for (std::size_t i = 0; i < n1; ++i) {
    for (std::size_t j = 0; j < n2; ++j) {
      double s = 0.0;
      for (std::size_t n = 0; n < N; ++n) s += tmp[i * N + n] * rows2[j * N + n];
      out[i * n2 + j] = s;
    }
  }
  return out;
}

std::vector<double> clip_and_renormalize(std::span<const double> values, const numerics::Grid1D& grid) {
  std::vector<double> out(values.begin(), values.end());
  for (double& v : out) v = std::max(v, 0.0);
  const double mass = numerics::trapezoid(out, grid);
  if (mass > 0.0) {
    for (double& v : out) v /= mass;
  }
  return out;
}

double gamma_min(double sigma2) {
  if (std::abs(sigma2 - 1.0) < 1e-12) return 3.0 + std::log(8.0);
  const double c = (sigma2 + 1.0) / sigma2;
  const double second = (c / 4.0) * (std::log(std::abs(2.0 / c - 1.0)) + 2.0 * std::log(4.0));
  return c * c + std::max(16.0 * std::exp(1.5), second);
}

double zeta_min(double l, double r) {
  if (!std::isfinite(l)) return numerics::kInf;
  return r >= l ? 5.0 : 5.0 * l / r;
}

ModeSelection select_modes_with_gamma(double eps, double L, double gamma) {
  if (!(eps > 0.0)) throw ConfigError("eps", "eps must be positive");
  if (!(L > 0.0)) throw ConfigError("L", "L must be positive");
  if (!(gamma > 0.0)) throw ConfigError("gamma", "gamma must be positive");
  ModeSelection s;
  s.gamma = gamma;
  s.ratio = kPi * kPi / (gamma * L * L * eps * eps);
  const double n = std::floor(s.ratio);
  if (n < 1.0) {
    s.N = 1;
    s.regime_violated = true;
  } else {
    s.N = n > 1e9 ? 1000000000 : static_cast<int>(n);
  }
  return s;
}

ModeSelection select_modes(double eps, double L, double sigma2, double gamma_margin) {
  if (!(sigma2 > 0.0)) throw ConfigError("sigma2", "sigma2 must be positive");
  if (!(gamma_margin >= 1.0)) throw ConfigError("gamma_margin", "gamma margin must be >= 1");
  const double gmin = gamma_min(sigma2);
  ModeSelection s = select_modes_with_gamma(eps, L, gmin * gamma_margin);
  s.gamma_min = gmin;
  return s;
}

TimeSelection select_time(double eps, double l, double r, double kappa, double zeta_margin) {
  if (!(eps > 0.0)) throw ConfigError("eps", "eps must be positive");
  if (!(kappa > 0.0)) throw ConfigError("kappa", "kappa must be positive");
  if (!(zeta_margin > 1.0)) throw ConfigError("zeta_margin", "zeta margin must be > 1");
  TimeSelection s;
  s.kappa = kappa;
  s.zeta_min = zeta_min(l, r);
  if (!std::isfinite(s.zeta_min)) {
    s.formal = true;
    s.zeta = numerics::kInf;
    s.T = std::numeric_limits<double>::quiet_NaN();
    return s;
  }
  s.zeta = s.zeta_min * zeta_margin;
  s.T = kappa * std::pow(eps, -s.zeta);
  return s;
}

std::vector<double> quadrature_coeffs(const model::ReferenceDensity& density, int N, double tol) {
  if (N < 1) throw ConfigError("N", "number of modes N must be >= 1");
  std::vector<double> out(static_cast<std::size_t>(N));
  // Hermite functions oscillate on the scale pi / sqrt(2N); resolve both that
  // and the density's own features.
  const double hermite_scale = std::numbers::pi / std::sqrt(2.0 * N + 1.0);
  const double feature = density.feature_scale() > 0.0 ? std::min(density.feature_scale(), hermite_scale) : hermite_scale;
  for (int n = 0; n < N; ++n) {
    out[static_cast<std::size_t>(n)] = model::integrate_line(
        [&](double x) { return basis::hermite_fn(n, x) * density(x); }, density.domain(), feature, tol);
  }
  return out;
}

std::string coefficients_to_json(const SpectralEstimate& est) {
  nlohmann::json j;
  j["dim"] = est.dim;
  j["N"] = est.N;
  j["T"] = est.meta.T;
  j["eps"] = est.meta.eps ? nlohmann::json(*est.meta.eps) : nlohmann::json(nullptr);
  j["h"] = est.meta.h;
  j["seed"] = est.meta.seed;
  j["potential"] = est.meta.potential;
  j["coeffs"] = est.coeffs;
  return j.dump(2);
}

SpectralEstimate coefficients_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("coeffs", std::string("coefficient file is not valid JSON: ") + e.what());
  }
  const auto need = [&](const char* key) -> const nlohmann::json& {
    if (!j.contains(key)) throw ConfigError(key, std::string("coefficient file is missing '") + key + "'");
    return j.at(key);
  };
  SpectralEstimate est;
  try {
    est.dim = need("dim").get<int>();
    est.N = need("N").get<int>();
    est.coeffs = need("coeffs").get<std::vector<double>>();
    est.meta.T = j.value("T", 0.0);
    if (j.contains("eps") && !j["eps"].is_null()) est.meta.eps = j["eps"].get<double>();
    est.meta.h = j.value("h", 0.0);
    est.meta.seed = j.value("seed", std::uint64_t{0});
    est.meta.potential = j.value("potential", std::string{});
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("coeffs", std::string("coefficient file has a field of the wrong type: ") + e.what());
  }
  if (est.dim != 1 && est.dim != 2) throw ConfigError("dim", "coefficient file dimension must be 1 or 2");
  if (est.N < 1) throw ConfigError("N", "coefficient file N must be >= 1");
  if (est.coeffs.size() != coeff_count(est.N, est.dim)) {
    throw ConfigError("coeffs", "coefficient count does not match N and dim");
  }
  for (double c : est.coeffs) {
    if (!std::isfinite(c)) throw ConfigError("coeffs", "coefficient file contains a non-finite value");
  }
  return est;
}

void write_coefficients(const std::filesystem::path& path, const SpectralEstimate& est) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open coefficient file '" + path.string() + "' for writing");
  out << coefficients_to_json(est) << '\n';
  if (!out) throw IoError("write failed for coefficient file '" + path.string() + "'");
}

SpectralEstimate read_coefficients(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open coefficient file '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return coefficients_from_json(ss.str());
}

}  // namespace homodens::estimator
