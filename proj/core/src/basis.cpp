#include "homodens/basis.hpp"

#include <array>
#include <cmath>
#include <string>

#include "homodens/error.hpp"

namespace homodens::basis {

namespace {

// Below this |x| the Gaussian factor e^{-x^2/2} is a normal double, so the
// plain recurrence is exact to rounding. Beyond it the row is computed with
// a running power-of-two scale to avoid underflow of psi_0.
constexpr double kPlainRecurrenceLimit = 26.0;

constexpr std::size_t kTableSize = 1024;

// a[n] = sqrt(2/(n+1)), b[n] = sqrt(n/(n+1)).
struct RecurrenceTable {
  std::array<double, kTableSize> a{};
  std::array<double, kTableSize> b{};
  RecurrenceTable() {
    for (std::size_t n = 0; n < kTableSize; ++n) {
      const double nd = static_cast<double>(n);
      a[n] = std::sqrt(2.0 / (nd + 1.0));
      b[n] = std::sqrt(nd / (nd + 1.0));
    }
  }
};

const RecurrenceTable& table() {
  static const RecurrenceTable t;
  return t;
}

inline double coef_a(std::size_t n) {
  return n < kTableSize ? table().a[n] : std::sqrt(2.0 / (static_cast<double>(n) + 1.0));
}

inline double coef_b(std::size_t n) {
  return n < kTableSize ? table().b[n]
                        : std::sqrt(static_cast<double>(n) / (static_cast<double>(n) + 1.0));
}

void fill_row_scaled(double x, std::span<double> out) {
  // Recurrence on unscaled values; the Gaussian factor is carried in log2.
  const double log2_gauss = -0.5 * x * x / std::log(2.0);
  double prev = 0.0;
  double cur = kPsiZeroPeak;
  int exponent = 0;  // true value = cur * 2^(exponent + log2_gauss)
  const auto emit = [&](std::size_t n, double v) {
    out[n] = v * std::exp2(static_cast<double>(exponent) + log2_gauss);
  };
  emit(0, cur);
  for (std::size_t n = 0; n + 1 < out.size(); ++n) {
    const double next = x * coef_a(n) * cur - coef_b(n) * prev;
    prev = cur;
    cur = next;
    if (std::abs(cur) > 0x1p500) {
      cur = std::ldexp(cur, -500);
      prev = std::ldexp(prev, -500);
      exponent += 500;
    }
    emit(n + 1, cur);
  }
}

}  // namespace

double hermite_poly(int n, double x) {
  if (n < 0 || n > kMaxHermitePolyOrder) {
    throw RangeError("hermite_poly: order " + std::to_string(n) + " outside [0, " +
                     std::to_string(kMaxHermitePolyOrder) + "]");
  }
  if (n == 0) return 1.0;
  double prev = 1.0;
  double cur = 2.0 * x;
  for (int k = 1; k < n; ++k) {
    const double next = 2.0 * x * cur - 2.0 * k * prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

double hermite_fn(int n, double x) {
  if (n < 0) return 0.0;
  std::vector<double> row(static_cast<std::size_t>(n) + 1);
  hermite_fn_row(x, row);
  return row.back();
}

void hermite_fn_row(double x, std::span<double> out) {
  if (out.empty()) return;
  if (std::abs(x) >= kPlainRecurrenceLimit) {
    fill_row_scaled(x, out);
    return;
  }
  double prev = 0.0;
  double cur = kPsiZeroPeak * std::exp(-0.5 * x * x);
  out[0] = cur;
  for (std::size_t n = 0; n + 1 < out.size(); ++n) {
    const double next = x * coef_a(n) * cur - coef_b(n) * prev;
    prev = cur;
    cur = next;
    out[n + 1] = cur;
  }
}

BasisValueRow hermite_fn_row(int N, double x) {
  if (N < 1) throw RangeError("hermite_fn_row: N must be >= 1");
  BasisValueRow row{x, std::vector<double>(static_cast<std::size_t>(N))};
  hermite_fn_row(x, row.values);
  return row;
}

double tensor_fn(int m, int n, double x1, double x2) { return hermite_fn(m, x1) * hermite_fn(n, x2); }

}  // namespace homodens::basis
