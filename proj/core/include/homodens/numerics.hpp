#pragma once

// Quadrature, evaluation grids and L2 metrics.

#include <cstddef>
#include <functional>
#include <limits>
#include <memory>
#include <span>
#include <vector>

namespace homodens::numerics {

using RealFn = std::function<double(double)>;
using RealFn2 = std::function<double(double, double)>;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct QuadOptions {
  double abs_tol = 1e-10;
  double rel_tol = 0.0;
  std::size_t max_subdivisions = 20000;
  // Number of equal pieces the (mapped) domain is split into before any
  // adaptive refinement. Oscillatory integrands want more.
  std::size_t initial_pieces = 32;
};

struct QuadResult {
  double value = 0.0;
  double achieved_tol = 0.0;  // estimated absolute error
  std::size_t evaluations = 0;
};

// Adaptive 7/15-point Gauss-Kronrod on [lo, hi]. Either bound may be
// infinite; the real line is mapped to (-1, 1) with x = t / (1 - t^2) and a
// half line [a, inf) with x = a + t / (1 - t). Throws NumericalError (carrying
// the best value) when the subdivision budget runs out.
QuadResult quad_adaptive(const RealFn& f, double lo, double hi, const QuadOptions& opts = {});

// Integral over the whole real line to absolute tolerance `tol`.
QuadResult quad_adaptive(const RealFn& f, double tol);

// Nested adaptive quadrature over the box [lo1, hi1] x [lo2, hi2].
QuadResult quad_adaptive_2d(const RealFn2& f, double lo1, double hi1, double lo2, double hi2,
                            const QuadOptions& opts = {});

struct GaussHermiteRule {
  std::vector<double> nodes;    // ascending
  std::vector<double> weights;  // for weight function e^{-x^2}
  // weights[i] * e^{nodes[i]^2}, computed without forming the product, for
  // integrating f directly: int f ~ sum scaled_weights[i] f(nodes[i]).
  std::vector<double> scaled_weights;
};

inline constexpr int kMaxGaussHermiteOrder = 400;

// n-point Gauss-Hermite rule, exact for polynomials of degree <= 2n - 1.
// Rules are memoized; the returned reference stays valid for the program
// lifetime. Throws RangeError for n outside [1, kMaxGaussHermiteOrder].
const GaussHermiteRule& gauss_hermite_nodes(int n);

struct Grid1D {
  double lo = 0.0;
  double hi = 1.0;
  std::size_t count = 2;

  Grid1D() = default;
  Grid1D(double lo_, double hi_, std::size_t count_);

  double spacing() const noexcept { return (hi - lo) / static_cast<double>(count - 1); }
  double point(std::size_t i) const noexcept {
    return i + 1 == count ? hi : lo + static_cast<double>(i) * spacing();
  }
  std::vector<double> points() const;
};

struct Box2D {
  Grid1D x1;
  Grid1D x2;
};

// Trapezoid rule on samples over a grid (values.size() == grid.count).
double trapezoid(std::span<const double> values, const Grid1D& grid);
// Row-major samples, values[i * x2.count + j] at (x1[i], x2[j]).
double trapezoid(std::span<const double> values, const Box2D& box);

// (integral (f - g)^2)^{1/2} by the trapezoid rule.
double l2_error(const RealFn& f, const RealFn& g, const Grid1D& grid);
double l2_error(const RealFn2& f, const RealFn2& g, const Box2D& box);

// Same on pre-sampled values.
double l2_error(std::span<const double> f, std::span<const double> g, const Grid1D& grid);
double l2_error(std::span<const double> f, std::span<const double> g, const Box2D& box);

}  // namespace homodens::numerics
