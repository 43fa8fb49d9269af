#pragma once

// Closed forms for the Gaussian case (V = (x - mu)^2 / 2) and explicit bounds
// on Hermite polynomials and coefficient tails. These serve as independent
// references for the basis, quadrature and estimator code.

#include <cmath>
#include <complex>

namespace homodens::oracles {

struct GaussianCase {
  double mu = 0.0;
  double sigma2 = 1.0;

  GaussianCase(double mu_, double sigma2_);

  double c() const noexcept { return (sigma2 + 1.0) / sigma2; }
  // 1/4 log|(sigma2 + 1)/(sigma2 - 1)|, or 1/4 when sigma2 = 1.
  double lambda() const noexcept;
  bool unit_variance() const noexcept;
};

// H~_n(x; sigma2) in its three cases sigma2 <, =, > 1.
std::complex<double> htilde(int n, double x, const GaussianCase& gc);

struct OracleValue {
  std::complex<double> value;
  // The Hermite recurrence went through intermediate values so much larger
  // than the result that relative accuracy is worse than 1e-6.
  bool precision_warning = false;
};

// int psi_n(x) exp(-(x - mu)^2/(2 sigma2) + sign i (2 pi k / (L eps)) x) dx
// in closed form. sign is +1 or -1; k >= 0.
OracleValue fourier_gauss_hermite(int n, const GaussianCase& gc, int k, double L, double eps, int sign);

// log of 4^n (1 + n/2) (2^{n/2} n^{n/2} + |x|^n), with 0^0 = 1.
double log_hermite_bound(int n, double x);
// The sharper two-branch version (|x| <= sqrt(2n) and |x| > sqrt(2n)).
double log_hermite_bound_piecewise(int n, double x);
inline double hermite_bound(int n, double x) { return std::exp(log_hermite_bound(n, x)); }

// alpha_n = int psi_n N(mu, sigma2) dx in closed form. The complex variant
// exposes the raw expression; gaussian_coeff checks that it is real.
std::complex<double> gaussian_coeff_complex(int n, const GaussianCase& gc);
double gaussian_coeff(int n, const GaussianCase& gc);

// Smallest N for which tail_bound applies.
double tail_threshold(const GaussianCase& gc);
// Upper bound on (sum_{n >= N} alpha_n^2)^{1/2}. Throws RangeError when
// N < tail_threshold(gc).
double tail_bound(int N, const GaussianCase& gc);

// int exp(-(x - mu)^2/(2 sigma2) + sign i (2 pi k / (L eps)) x) dx, k >= 1.
std::complex<double> gauss_char_integral(int k, double mu, double sigma2, double L, double eps, int sign);

}  // namespace homodens::oracles
