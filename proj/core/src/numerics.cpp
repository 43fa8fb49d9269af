#include "homodens/numerics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <queue>
#include <shared_mutex>
#include <sstream>
#include <string>
#include <utility>

#include "homodens/basis.hpp"
#include "homodens/error.hpp"

namespace homodens::numerics {

namespace {

// Kronrod 15-point abscissae (positive half) and weights; the embedded
// 7-point Gauss rule uses the odd-indexed abscissae.
constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
  double a;
  double b;
  double value;
  double error;
  bool operator<(const Segment& o) const { return error < o.error; }
};

Segment gk15(const RealFn& g, double a, double b, std::size_t& evals) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = g(center);
  double kronrod = fc * kWgk[7];
  double gauss = fc * kWg[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kXgk[j];
    const double f1 = g(center - dx);
    const double f2 = g(center + dx);
    kronrod += kWgk[j] * (f1 + f2);
    if (j % 2 == 1) gauss += kWg[j / 2] * (f1 + f2);
  }
  evals += 15;
  const double value = kronrod * half;
  double error = std::abs((kronrod - gauss) * half);
  if (!std::isfinite(value)) error = kInf;
  return {a, b, value, error};
}

// Integrand on the mapped variable t together with the t-interval.
struct Mapped {
  RealFn g;
  double t_lo;
  double t_hi;
};

Mapped map_domain(const RealFn& f, double lo, double hi) {
  const bool lo_inf = std::isinf(lo);
  const bool hi_inf = std::isinf(hi);
  if (!lo_inf && !hi_inf) return {f, lo, hi};
  if (lo_inf && hi_inf) {
    return {[&f](double t) {
              const double d = 1.0 - t * t;
              const double x = t / d;
              const double v = f(x);
              return v == 0.0 ? 0.0 : v * (1.0 + t * t) / (d * d);
            },
            -1.0, 1.0};
  }
  if (hi_inf) {
    return {[&f, lo](double t) {
              const double d = 1.0 - t;
              const double v = f(lo + t / d);
              return v == 0.0 ? 0.0 : v / (d * d);
            },
            0.0, 1.0};
  }
  return {[&f, hi](double t) {
            const double d = 1.0 - t;
            const double v = f(hi - t / d);
            return v == 0.0 ? 0.0 : v / (d * d);
          },
          0.0, 1.0};
}

}  // namespace

QuadResult quad_adaptive(const RealFn& f, double lo, double hi, const QuadOptions& opts) {
  if (lo == hi) return {};
  if (lo > hi) {
    QuadResult r = quad_adaptive(f, hi, lo, opts);
    r.value = -r.value;
    return r;
  }
  const Mapped m = map_domain(f, lo, hi);
  std::size_t evals = 0;
  std::priority_queue<Segment> heap;
  double total = 0.0;
  double total_err = 0.0;
  const std::size_t pieces = std::max<std::size_t>(1, opts.initial_pieces);
  const double step = (m.t_hi - m.t_lo) / static_cast<double>(pieces);
  for (std::size_t i = 0; i < pieces; ++i) {
    const double a = m.t_lo + static_cast<double>(i) * step;
    const double b = i + 1 == pieces ? m.t_hi : a + step;
    Segment s = gk15(m.g, a, b, evals);
    total += s.value;
    total_err += s.error;
    heap.push(s);
  }
  const auto target = [&] { return std::max(opts.abs_tol, opts.rel_tol * std::abs(total)); };
  std::size_t segments = pieces;
  while (total_err > target()) {
    if (segments >= opts.max_subdivisions) {
      std::ostringstream os;
      os << "quad_adaptive: subdivision budget exhausted; best value " << total
         << ", achieved tolerance " << total_err;
      throw NumericalError(os.str(), total, total_err);
    }
    Segment worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    Segment left = gk15(m.g, worst.a, mid, evals);
    Segment right = gk15(m.g, mid, worst.b, evals);
    total += left.value + right.value - worst.value;
    total_err += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
    ++segments;
    // Periodically resum to shed accumulated cancellation error.
    if (segments % 512 == 0) {
      auto copy = heap;
      total = 0.0;
      total_err = 0.0;
      while (!copy.empty()) {
        total += copy.top().value;
        total_err += copy.top().error;
        copy.pop();
      }
    }
  }
  return {total, total_err, evals};
}

QuadResult quad_adaptive(const RealFn& f, double tol) {
  QuadOptions opts;
  opts.abs_tol = tol;
  return quad_adaptive(f, -kInf, kInf, opts);
}

QuadResult quad_adaptive_2d(const RealFn2& f, double lo1, double hi1, double lo2, double hi2,
                            const QuadOptions& opts) {
  QuadOptions inner = opts;
  const double width1 = std::isinf(lo1) || std::isinf(hi1) ? 1.0 : std::max(1.0, hi1 - lo1);
  inner.abs_tol = opts.abs_tol / (4.0 * width1);
  inner.rel_tol = opts.rel_tol / 4.0;
  std::size_t evals = 0;
  double inner_err = 0.0;
  const RealFn outer = [&](double x1) {
    const QuadResult r = quad_adaptive([&](double x2) { return f(x1, x2); }, lo2, hi2, inner);
    evals += r.evaluations;
    inner_err = std::max(inner_err, r.achieved_tol);
    return r.value;
  };
  QuadOptions outer_opts = opts;
  outer_opts.abs_tol = opts.abs_tol / 2.0;
  outer_opts.rel_tol = opts.rel_tol / 2.0;
  QuadResult r = quad_adaptive(outer, lo1, hi1, outer_opts);
  r.achieved_tol += inner_err * width1;
  r.evaluations = evals;
  return r;
}

namespace {

// p_n(z) = e^{z^2/2} psi_n(z) and its derivative sqrt(2n) p_{n-1}(z), by the
// normalized recurrence without the Gaussian factor.
std::pair<double, double> scaled_hermite(int n, double z) {
  double p1 = basis::kPsiZeroPeak;
  double p2 = 0.0;
  for (int j = 0; j < n; ++j) {
    const double p3 = p2;
    p2 = p1;
    p1 = z * std::sqrt(2.0 / (j + 1.0)) * p2 - std::sqrt(j / (j + 1.0)) * p3;
  }
  return {p1, std::sqrt(2.0 * n) * p2};
}

GaussHermiteRule compute_gauss_hermite(int n) {
  // Positive roots are bracketed by sign changes on a grid finer than the
  // smallest root spacing (about pi / sqrt(2n + 1) near the origin), then
  // polished with Newton steps kept inside the bracket.
  const double nd = n;
  const double edge = std::sqrt(2.0 * nd + 1.0) + 1.0;
  std::vector<double> pos;
  for (int refine = 16; pos.size() != static_cast<std::size_t>(n / 2); refine *= 4) {
    if (refine > 4096) throw NumericalError("gauss_hermite_nodes: root bracketing failed", 0.0, 0.0);
    pos.clear();
    const double step = std::numbers::pi / std::sqrt(2.0 * nd + 1.0) / refine;
    double a = n % 2 == 1 ? step * 0.5 : 0.0;
    double fa = scaled_hermite(n, a).first;
    for (double b = a + step; a < edge; a = b, b += step) {
      const double fb = scaled_hermite(n, b).first;
      if ((fa < 0.0) != (fb < 0.0)) {
        double lo = a, hi = b, flo = fa;
        double z = 0.5 * (lo + hi);
        for (int it = 0; it < 200; ++it) {
          const auto [f, df] = scaled_hermite(n, z);
          if ((f < 0.0) == (flo < 0.0)) {
            lo = z;
            flo = f;
          } else {
            hi = z;
          }
          double next = z - f / df;
          if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
          const bool done = std::abs(next - z) <= 1e-15 * std::max(1.0, std::abs(z));
          z = next;
          if (done) break;
        }
        pos.push_back(z);
      }
      fa = fb;
    }
  }
  std::vector<double> x;
  x.reserve(static_cast<std::size_t>(n));
  for (auto it = pos.rbegin(); it != pos.rend(); ++it) x.push_back(-*it);
  if (n % 2 == 1) x.push_back(0.0);
  for (double z : pos) x.push_back(z);

  std::vector<double> w(x.size());
  std::vector<double> sw(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    // Christoffel form: w_i e^{x_i^2} = 1 / (n psi_{n-1}(x_i)^2) and
    // w_i = 2 / p_n'(x_i)^2 in the unweighted normalization.
    const double dp = scaled_hermite(n, x[i]).second;
    w[i] = 2.0 / (dp * dp);
    const double psi = basis::hermite_fn(n - 1, x[i]);
    sw[i] = 1.0 / (nd * psi * psi);
  }
  return {std::move(x), std::move(w), std::move(sw)};
}

}  // namespace

const GaussHermiteRule& gauss_hermite_nodes(int n) {
  if (n < 1 || n > kMaxGaussHermiteOrder) {
    throw RangeError("gauss_hermite_nodes: order " + std::to_string(n) + " outside [1, " +
                     std::to_string(kMaxGaussHermiteOrder) + "]");
  }
  static std::shared_mutex mutex;
  static std::map<int, std::unique_ptr<GaussHermiteRule>> cache;
  {
    std::shared_lock lock(mutex);
    if (auto it = cache.find(n); it != cache.end()) return *it->second;
  }
  auto rule = std::make_unique<GaussHermiteRule>(compute_gauss_hermite(n));
  std::unique_lock lock(mutex);
  auto [it, inserted] = cache.try_emplace(n, std::move(rule));
  return *it->second;
}

Grid1D::Grid1D(double lo_, double hi_, std::size_t count_) : lo(lo_), hi(hi_), count(count_) {
  if (!(lo < hi)) throw ConfigError("grid", "grid requires lo < hi");
  if (count < 2) throw ConfigError("grid", "grid requires count >= 2");
}

std::vector<double> Grid1D::points() const {
  std::vector<double> p(count);
  for (std::size_t i = 0; i < count; ++i) p[i] = point(i);
  return p;
}

double trapezoid(std::span<const double> values, const Grid1D& grid) {
  if (values.size() != grid.count) throw ConfigError("grid", "sample count does not match grid");
  double s = 0.5 * (values.front() + values.back());
  for (std::size_t i = 1; i + 1 < values.size(); ++i) s += values[i];
  return s * grid.spacing();
}

double trapezoid(std::span<const double> values, const Box2D& box) {
  const std::size_t n1 = box.x1.count;
  const std::size_t n2 = box.x2.count;
  if (values.size() != n1 * n2) throw ConfigError("grid", "sample count does not match box");
  std::vector<double> rows(n1);
  for (std::size_t i = 0; i < n1; ++i) rows[i] = trapezoid(values.subspan(i * n2, n2), box.x2);
  return trapezoid(rows, box.x1);
}

double l2_error(std::span<const double> f, std::span<const double> g, const Grid1D& grid) {
  if (f.size() != g.size()) throw ConfigError("grid", "sample vectors differ in length");
  std::vector<double> sq(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) sq[i] = (f[i] - g[i]) * (f[i] - g[i]);
  return std::sqrt(trapezoid(sq, grid));
}

double l2_error(std::span<const double> f, std::span<const double> g, const Box2D& box) {
  if (f.size() != g.size()) throw ConfigError("grid", "sample vectors differ in length");
  std::vector<double> sq(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) sq[i] = (f[i] - g[i]) * (f[i] - g[i]);
  return std::sqrt(trapezoid(sq, box));
}

double l2_error(const RealFn& f, const RealFn& g, const Grid1D& grid) {
  std::vector<double> fv(grid.count), gv(grid.count);
  for (std::size_t i = 0; i < grid.count; ++i) {
    const double x = grid.point(i);
    fv[i] = f(x);
    gv[i] = g(x);
  }
  return l2_error(fv, gv, grid);
}

double l2_error(const RealFn2& f, const RealFn2& g, const Box2D& box) {
  const std::size_t n1 = box.x1.count;
  const std::size_t n2 = box.x2.count;
  std::vector<double> fv(n1 * n2), gv(n1 * n2);
  for (std::size_t i = 0; i < n1; ++i) {
    const double a = box.x1.point(i);
    for (std::size_t j = 0; j < n2; ++j) {
      const double b = box.x2.point(j);
      fv[i * n2 + j] = f(a, b);
      gv[i * n2 + j] = g(a, b);
    }
  }
  return l2_error(fv, gv, box);
}

}  // namespace homodens::numerics
