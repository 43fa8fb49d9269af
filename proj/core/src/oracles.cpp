#include "homodens/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "homodens/error.hpp"

namespace homodens::oracles {

namespace {

using cd = std::complex<double>;

constexpr double kPi = std::numbers::pi;
constexpr double kUnitTol = 1e-12;
// pi^{1/4}
const double kPiQuarter = std::pow(kPi, 0.25);

struct Normalized {
  cd value;       // H_n(z) / sqrt(2^n n!)
  double growth;  // max |intermediate| / |value|
};

// Normalized complex Hermite recurrence
//   h_{k+1} = sqrt(2/(k+1)) z h_k - sqrt(k/(k+1)) h_{k-1},  h_0 = 1.
Normalized normalized_hermite(int n, cd z) {
  cd prev{0.0, 0.0};
  cd cur{1.0, 0.0};
  double peak = 1.0;
  for (int k = 0; k < n; ++k) {
    const double kd = k;
    const cd next = std::sqrt(2.0 / (kd + 1.0)) * z * cur - std::sqrt(kd / (kd + 1.0)) * prev;
    prev = cur;
    cur = next;
    peak = std::max(peak, std::abs(cur));
  }
  const double mag = std::abs(cur);
  return {cur, mag > 0.0 ? peak / mag : std::numeric_limits<double>::infinity()};
}

// log sqrt(2^n n!)
double log_norm(int n) { return 0.5 * (n * std::log(2.0) + std::lgamma(n + 1.0)); }

// H~_n(x)/sqrt(2^n n!) with the recurrence growth factor.
Normalized normalized_htilde(int n, double x, const GaussianCase& gc) {
  const double c = gc.c();
  const double m = gc.mu / gc.sigma2;
  if (gc.unit_variance()) {
    // (mu - i x)^n / sqrt(2^n n!)
    const cd base{gc.mu, -x};
    if (n == 0) return {{1.0, 0.0}, 1.0};
    if (std::abs(base) == 0.0) return {{0.0, 0.0}, 1.0};
    return {std::exp(static_cast<double>(n) * std::log(base) - log_norm(n)), 1.0};
  }
  if (gc.sigma2 < 1.0) {
    const double a = 1.0 - 2.0 / c;
    const cd z = cd{-m, x} / (c * std::sqrt(a));
    Normalized h = normalized_hermite(n, z);
    const double sign = n % 2 == 0 ? 1.0 : -1.0;
    h.value *= sign * std::pow(a, 0.5 * n);
    return h;
  }
  const double a = 2.0 / c - 1.0;
  const cd z = cd{x, m} / (c * std::sqrt(a));
  Normalized h = normalized_hermite(n, z);
  h.value *= std::pow(cd{0.0, -1.0}, n) * std::pow(a, 0.5 * n);
  return h;
}

double log_sum_exp(double a, double b) {
  if (a == -std::numeric_limits<double>::infinity()) return b;
  if (b == -std::numeric_limits<double>::infinity()) return a;
  const double hi = std::max(a, b);
  return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

// log(n^{n/2}) with 0^0 = 1.
double log_n_pow_half_n(int n) { return n == 0 ? 0.0 : 0.5 * n * std::log(static_cast<double>(n)); }

// log(|x|^n) with 0^0 = 1.
double log_abs_pow(double x, int n) {
  if (n == 0) return 0.0;
  if (x == 0.0) return -std::numeric_limits<double>::infinity();
  return n * std::log(std::abs(x));
}

}  // namespace

GaussianCase::GaussianCase(double mu_, double sigma2_) : mu(mu_), sigma2(sigma2_) {
  if (!(sigma2 > 0.0)) throw ConfigError("sigma2", "Gaussian variance must be positive");
}

bool GaussianCase::unit_variance() const noexcept { return std::abs(sigma2 - 1.0) < kUnitTol; }

double GaussianCase::lambda() const noexcept {
  if (unit_variance()) return 0.25;
  return 0.25 * std::log(std::abs((sigma2 + 1.0) / (sigma2 - 1.0)));
}

std::complex<double> htilde(int n, double x, const GaussianCase& gc) {
  if (n < 0) throw RangeError("htilde: order must be non-negative");
  return normalized_htilde(n, x, gc).value * std::exp(log_norm(n));
}

OracleValue fourier_gauss_hermite(int n, const GaussianCase& gc, int k, double L, double eps, int sign) {
  if (n < 0) throw RangeError("fourier_gauss_hermite: order must be non-negative");
  if (k < 0) throw RangeError("fourier_gauss_hermite: k must be non-negative");
  if (sign != 1 && sign != -1) throw RangeError("fourier_gauss_hermite: sign must be +1 or -1");
  const double omega = 2.0 * kPi * k / (L * eps);
  const double c = gc.c();
  const double m = gc.mu / gc.sigma2;
  // Completing the square in x gives exp((mu/sigma2 + sign i omega)^2 / (2c)).
  const cd shifted{m, sign * omega};
  const cd exponent = -gc.mu * gc.mu / (2.0 * gc.sigma2) + shifted * shifted / (2.0 * c);
  const Normalized h = normalized_htilde(n, -sign * omega, gc);
  OracleValue out;
  out.value = kPiQuarter * std::sqrt(2.0 / c) * std::exp(exponent) * h.value;
  out.precision_warning = h.growth * std::numeric_limits<double>::epsilon() * std::max(1, n) > 1e-6;
  return out;
}

double log_hermite_bound(int n, double x) {
  if (n < 0) throw RangeError("hermite_bound: order must be non-negative");
  const double head = n * std::log(4.0) + std::log1p(0.5 * n);
  const double a = 0.5 * n * std::log(2.0) + log_n_pow_half_n(n);
  return head + log_sum_exp(a, log_abs_pow(x, n));
}

double log_hermite_bound_piecewise(int n, double x) {
  if (n < 0) throw RangeError("hermite_bound: order must be non-negative");
  const double tail = std::log1p(0.5 * n);
  if (std::abs(x) <= std::sqrt(2.0 * n)) {
    return log_n_pow_half_n(n) + n * std::log(4.0 * std::numbers::sqrt2) + tail;
  }
  return 2.0 * n * std::log(2.0) + log_abs_pow(x, n) + tail;
}

std::complex<double> gaussian_coeff_complex(int n, const GaussianCase& gc) {
  if (n < 0) throw RangeError("gaussian_coeff: order must be non-negative");
  const double s2 = gc.sigma2;
  const double mu = gc.mu;
  const double pre = std::exp(-mu * mu / (2.0 * (s2 + 1.0))) / (kPiQuarter * std::sqrt(s2 + 1.0));
  if (gc.unit_variance()) {
    if (n == 0) return pre;
    if (mu == 0.0) return 0.0;
    const double logmag = n * std::log(std::abs(mu)) - log_norm(n);
    const double sgn = (mu < 0.0 && n % 2 == 1) ? -1.0 : 1.0;
    return pre * sgn * std::exp(logmag);
  }
  if (s2 < 1.0) {
    const double ratio = (1.0 - s2) / (1.0 + s2);
    const Normalized h = normalized_hermite(n, cd{-mu / std::sqrt(1.0 - s2 * s2), 0.0});
    const double sign = n % 2 == 0 ? 1.0 : -1.0;
    return pre * sign * std::pow(ratio, 0.5 * n) * h.value;
  }
  const double ratio = (s2 - 1.0) / (s2 + 1.0);
  const Normalized h = normalized_hermite(n, cd{0.0, mu / std::sqrt(s2 * s2 - 1.0)});
  return pre * std::pow(cd{0.0, -1.0}, n) * std::pow(ratio, 0.5 * n) * h.value;
}

double gaussian_coeff(int n, const GaussianCase& gc) {
  const cd v = gaussian_coeff_complex(n, gc);
  if (std::abs(v.imag()) > 1e-12 * std::max(1.0, std::abs(v.real()))) {
    std::ostringstream os;
    os << "gaussian_coeff: closed form has imaginary part " << v.imag();
    throw NumericalError(os.str(), v.real(), std::abs(v.imag()));
  }
  return v.real();
}

double tail_threshold(const GaussianCase& gc) {
  const double mu2 = gc.mu * gc.mu;
  if (gc.unit_variance()) return std::exp(1.5) * mu2 / 2.0;
  const double s4 = gc.sigma2 * gc.sigma2;
  const double lg = std::log(std::abs((gc.sigma2 + 1.0) / (gc.sigma2 - 1.0)));
  return 32.0 * mu2 / std::abs(s4 - 1.0) / (lg * lg);
}

double tail_bound(int N, const GaussianCase& gc) {
  const double threshold = tail_threshold(gc);
  if (N < threshold) {
    std::ostringstream os;
    os << "tail_bound: N = " << N << " is below the admissible minimum N_min = " << threshold;
    throw RangeError(os.str());
  }
  const double lam = gc.lambda();
  const double s2 = gc.sigma2;
  const double pre = 1.0 / (kPiQuarter * std::sqrt((s2 + 1.0) * (1.0 - std::exp(-2.0 * lam))));
  return pre * std::exp(-gc.mu * gc.mu / (2.0 * (s2 + 1.0)) - lam * N);
}

std::complex<double> gauss_char_integral(int k, double mu, double sigma2, double L, double eps, int sign) {
  if (k < 1) throw RangeError("gauss_char_integral: k must be >= 1");
  if (sign != 1 && sign != -1) throw RangeError("gauss_char_integral: sign must be +1 or -1");
  const double omega = 2.0 * kPi * k / (L * eps);
  return std::sqrt(2.0 * kPi * sigma2) * std::exp(cd{-0.5 * sigma2 * omega * omega, sign * omega * mu});
}

}  // namespace homodens::oracles
