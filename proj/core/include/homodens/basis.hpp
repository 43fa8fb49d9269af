#pragma once

// Hermite polynomials and orthonormal Hermite functions.
//
//   psi_n(x) = e^{-x^2/2} H_n(x) / sqrt(sqrt(pi) 2^n n!)
//
// All estimator work goes through the normalized three-term recurrence for
// psi_n, which stays bounded by pi^{-1/4} for every n. The raw polynomial H_n
// is kept for cross-checks only and is limited to n <= kMaxHermitePolyOrder.

#include <span>
#include <vector>

namespace homodens::basis {

inline constexpr int kMaxHermitePolyOrder = 512;

// pi^{-1/4}
inline constexpr double kPsiZeroPeak = 0.75112554446494248286;

// Physicists' Hermite polynomial H_n(x). Throws RangeError for n outside
// [0, kMaxHermitePolyOrder].
double hermite_poly(int n, double x);

// Orthonormal Hermite function psi_n(x).
double hermite_fn(int n, double x);

struct BasisValueRow {
  double point = 0.0;
  std::vector<double> values;  // psi_0(point) ... psi_{N-1}(point)

  int order_count() const noexcept { return static_cast<int>(values.size()); }
};

// psi_0..psi_{N-1} at x in one recurrence pass. Requires N >= 1.
BasisValueRow hermite_fn_row(int N, double x);

// Allocation-free variant for inner loops: fills out[n] = psi_n(x) for
// n < out.size().
void hermite_fn_row(double x, std::span<double> out);

// Psi_{mn}(x1, x2) = psi_m(x1) psi_n(x2).
double tensor_fn(int m, int n, double x1, double x2);

}  // namespace homodens::basis
