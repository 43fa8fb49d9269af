#include "homodens/model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "homodens/error.hpp"
#include "homodens/numerics.hpp"

namespace homodens::model {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kHalfSqrt2 = std::numbers::sqrt2 / 2.0;
constexpr double kPeriodicityTol = 1e-10;
// ln(1e12): densities below 1e-12 of their peak are treated as tails.
constexpr double kTailLogRatio = 27.631021115928547;
constexpr double kDomainSearchLimit = 1e3;

void require_positive(double v, const char* field) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    std::ostringstream os;
    os << field << " must be positive and finite (got " << v << ")";
    throw ConfigError(field, os.str());
  }
}

void check_periodic_1d(const FastPotential& fast) {
  for (int i = 0; i < 17; ++i) {
    const double y = -fast.period + 0.37 * fast.period * i / 4.0;
    const double a = fast.value(y);
    const double b = fast.value(y + fast.period);
    if (std::abs(a - b) > kPeriodicityTol * std::max(1.0, std::abs(a))) {
      std::ostringstream os;
      os << "fast potential '" << fast.name << "' is not periodic with period " << fast.period;
      throw ConfigError("L", os.str());
    }
  }
}

void check_periodic_2d(const FastPotential2D& fast) {
  for (int i = 0; i < 9; ++i) {
    for (int j = 0; j < 9; ++j) {
      const Vec2 y{-fast.periods[0] + 0.31 * fast.periods[0] * i, -fast.periods[1] + 0.29 * fast.periods[1] * j};
      const double a = fast.value(y);
      for (int d = 0; d < 2; ++d) {
        Vec2 z = y;
        z[d] += fast.periods[d];
        if (std::abs(a - fast.value(z)) > kPeriodicityTol * std::max(1.0, std::abs(a))) {
          std::ostringstream os;
          os << "fast potential '" << fast.name << "' is not periodic in coordinate " << d + 1;
          throw ConfigError("L", os.str());
        }
      }
    }
  }
}

// Oscillation range max p - min p over one period.
double fast_range(const FastPotential& fast) {
  double lo = numerics::kInf, hi = -numerics::kInf;
  for (int i = 0; i < 512; ++i) {
    const double v = fast.value(fast.period * i / 512.0);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  return hi - lo;
}

double fast_range(const FastPotential2D& fast) {
  double lo = numerics::kInf, hi = -numerics::kInf;
  for (int i = 0; i < 128; ++i) {
    for (int j = 0; j < 128; ++j) {
      const double v = fast.value({fast.periods[0] * i / 128.0, fast.periods[1] * j / 128.0});
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  return hi - lo;
}

// Smallest half-width b such that V(x)/sigma2 exceeds its running minimum by
// `margin` for |x| >= b along the scan.
double tail_half_width(const std::function<double(double)>& V, double sigma2, double margin) {
  double vmin = V(0.0);
  const double step = 0.05;
  double reach[2] = {0.0, 0.0};
  for (int side = 0; side < 2; ++side) {
    const double sgn = side == 0 ? 1.0 : -1.0;
    double x = 0.0;
    for (;;) {
      x += step;
      if (x > kDomainSearchLimit) {
        throw NumericalError("density is not integrable: potential does not confine", numerics::kInf,
                             numerics::kInf);
      }
      const double v = V(sgn * x);
      if (!std::isfinite(v)) break;
      vmin = std::min(vmin, v);
      if ((v - vmin) / sigma2 > margin) break;
    }
    reach[side] = x;
  }
  return std::max(reach[0], reach[1]);
}

}  // namespace

ProblemSpec::ProblemSpec(SlowPotential slow, FastPotential fast, double sigma2, double eps, double x0)
    : slow_(std::move(slow)), fast_(std::move(fast)), sigma2_(sigma2), eps_(eps), x0_(x0) {
  require_positive(sigma2_, "sigma2");
  require_positive(eps_, "eps");
  require_positive(fast_.period, "L");
  if (!slow_.value || !slow_.derivative || !fast_.value || !fast_.derivative) {
    throw ConfigError("potential", "potential is missing value or derivative");
  }
  if (!std::isfinite(x0_)) throw ConfigError("x0", "x0 must be finite");
  check_periodic_1d(fast_);
  v_shift_ = slow_.value(0.0);
  p_shift_ = fast_.value(0.0);
}

double ProblemSpec::l_constant() const {
  if (!slow_.lipschitz) return numerics::kInf;
  return (*slow_.lipschitz + std::abs(slow_.derivative(0.0))) / sigma2_;
}

double ProblemSpec::r_constant() const { return slow_.beta / sigma2_; }

ProblemSpec2D::ProblemSpec2D(SlowPotential2D slow, FastPotential2D fast, double sigma2, double eps, Vec2 x0)
    : slow_(std::move(slow)), fast_(std::move(fast)), sigma2_(sigma2), eps_(eps), x0_(x0) {
  require_positive(sigma2_, "sigma2");
  require_positive(eps_, "eps");
  require_positive(fast_.periods[0], "L");
  require_positive(fast_.periods[1], "L");
  if (!slow_.value || !slow_.gradient || !fast_.value || !fast_.gradient) {
    throw ConfigError("potential", "potential is missing value or gradient");
  }
  check_periodic_2d(fast_);
  v_shift_ = slow_.value({0.0, 0.0});
  p_shift_ = fast_.value({0.0, 0.0});
}

HomogenizedModel homogenize(const FastPotential& fast, double sigma2) {
  require_positive(sigma2, "sigma2");
  require_positive(fast.period, "L");
  numerics::QuadOptions opts;
  opts.abs_tol = 1e-13;
  opts.rel_tol = 1e-13;
  const double L = fast.period;
  const auto cell = [&](double sign) {
    try {
      return numerics::quad_adaptive([&](double y) { return std::exp(sign * fast.value(y) / sigma2); },
                                     0.0, L, opts)
          .value;
    } catch (const NumericalError& e) {
      // Retry at the documented tolerance before giving up.
      numerics::QuadOptions loose = opts;
      loose.abs_tol = 1e-10;
      loose.rel_tol = 1e-10;
      return numerics::quad_adaptive([&](double y) { return std::exp(sign * fast.value(y) / sigma2); },
                                     0.0, L, loose)
          .value;
    }
  };
  HomogenizedModel m;
  m.Pi = cell(-1.0);
  m.PiHat = cell(+1.0);
  m.K = L * L / (m.Pi * m.PiHat);
  m.Sigma = m.K * sigma2;
  return m;
}

std::string_view to_string(DensityKind kind) {
  return kind == DensityKind::Homogenized ? "rho" : "rho_eps";
}

double integrate_line(const std::function<double(double)>& f, std::pair<double, double> core,
                      double feature_scale, double abs_tol, double rel_tol) {
  numerics::QuadOptions opts;
  opts.abs_tol = abs_tol / 3.0;
  opts.rel_tol = rel_tol;
  const double width = core.second - core.first;
  if (feature_scale > 0.0) {
    opts.initial_pieces = std::max<std::size_t>(32, static_cast<std::size_t>(std::ceil(4.0 * width / feature_scale)));
  }
  opts.max_subdivisions = std::max<std::size_t>(opts.max_subdivisions, 20 * opts.initial_pieces);
  double total = numerics::quad_adaptive(f, core.first, core.second, opts).value;
  numerics::QuadOptions tail;
  tail.abs_tol = abs_tol / 3.0;
  tail.initial_pieces = 64;
  tail.max_subdivisions = 40000;
  total += numerics::quad_adaptive(f, -numerics::kInf, core.first, tail).value;
  total += numerics::quad_adaptive(f, core.second, numerics::kInf, tail).value;
  return total;
}

ReferenceDensity reference_density(const ProblemSpec& spec, DensityKind kind) {
  ReferenceDensity d;
  d.kind_ = kind;
  d.sigma2_ = spec.sigma2();
  const std::function<double(double)> V = [spec](double x) { return spec.V(x); };
  double margin = kTailLogRatio;
  if (kind == DensityKind::Homogenized) {
    d.energy_ = V;
  } else {
    const double eps = spec.eps();
    d.energy_ = [spec, eps](double x) { return spec.V(x) + spec.p(x / eps); };
    margin += fast_range(spec.fast()) / spec.sigma2();
    d.feature_scale_ = spec.period() * eps;
  }
  const double b = tail_half_width(V, spec.sigma2(), margin);
  d.domain_ = {-b, b};
  const auto& energy = d.energy_;
  const double s2 = d.sigma2_;
  double Z = 0.0;
  try {
    Z = integrate_line([&](double x) { return std::exp(-energy(x) / s2); }, d.domain_, d.feature_scale_, 1e-14, 1e-13);
  } catch (const NumericalError& e) {
    throw NumericalError(std::string("density is not integrable: ") + e.what(), e.best_value(), e.achieved_tol());
  }
  if (!(Z > 0.0) || !std::isfinite(Z)) {
    throw NumericalError("density is not integrable: normalization is not finite", Z, numerics::kInf);
  }
  d.Z_ = Z;
  return d;
}

ReferenceDensity2D reference_density(const ProblemSpec2D& spec, DensityKind kind) {
  ReferenceDensity2D d;
  d.kind_ = kind;
  d.sigma2_ = spec.sigma2();
  double margin = kTailLogRatio;
  double feature = 0.0;
  if (kind == DensityKind::Homogenized) {
    d.energy_ = [spec](Vec2 x) { return spec.V(x); };
  } else {
    const double eps = spec.eps();
    d.energy_ = [spec, eps](Vec2 x) { return spec.V(x) + spec.p({x[0] / eps, x[1] / eps}); };
    margin += fast_range(spec.fast()) / spec.sigma2();
    feature = std::min(spec.fast().periods[0], spec.fast().periods[1]) * eps;
  }
  // Box half-width from scans along both axes and both diagonals.
  double b = 0.0;
  for (const Vec2 dir : {Vec2{1, 0}, Vec2{0, 1}, Vec2{kHalfSqrt2, kHalfSqrt2}, Vec2{kHalfSqrt2, -kHalfSqrt2}}) {
    b = std::max(b, tail_half_width([&](double s) { return spec.V({s * dir[0], s * dir[1]}); }, spec.sigma2(),
                                    margin));
  }
  d.half_width_ = b;
  numerics::QuadOptions opts;
  opts.abs_tol = 1e-11;
  opts.rel_tol = 1e-11;
  if (feature > 0.0) opts.initial_pieces = std::max<std::size_t>(32, static_cast<std::size_t>(std::ceil(4.0 * b / feature)));
  opts.max_subdivisions = std::max<std::size_t>(opts.max_subdivisions, 20 * opts.initial_pieces);
  const auto& energy = d.energy_;
  const double s2 = d.sigma2_;
  const double Z =
      numerics::quad_adaptive_2d([&](double x1, double x2) { return std::exp(-energy(Vec2{x1, x2}) / s2); }, -b, b,
                                 -b, b, opts)
          .value;
  if (!(Z > 0.0) || !std::isfinite(Z)) {
    throw NumericalError("density is not integrable: normalization is not finite", Z, numerics::kInf);
  }
  d.Z_ = Z;
  return d;
}

// Catalog.

std::vector<std::string> PotentialCatalog::slow_names() const { return {"quadratic", "double-well"}; }
std::vector<std::string> PotentialCatalog::fast_names() const { return {"cos", "none"}; }
std::vector<std::string> PotentialCatalog::names_2d() const { return {"2d-example", "2d-example-sin1"}; }

bool PotentialCatalog::is_2d(std::string_view name) const {
  const auto n = names_2d();
  return std::find(n.begin(), n.end(), name) != n.end();
}

SlowPotential PotentialCatalog::slow(std::string_view name, double mu) const {
  if (name == "quadratic") {
    SlowPotential v;
    v.name = "quadratic";
    v.value = [mu](double x) { return 0.5 * (x - mu) * (x - mu); };
    v.derivative = [mu](double x) { return x - mu; };
    // sign(x) V'(x) = |x| - mu sign(x) >= |x|/2 once |x| >= 2|mu|.
    v.lipschitz = 1.0;
    v.beta = 0.5;
    v.radius = std::max(1.0, 2.0 * std::abs(mu));
    return v;
  }
  if (name == "double-well") {
    SlowPotential v;
    v.name = "double-well";
    v.value = [](double x) { return 0.25 * x * x * x * x - 0.5 * x * x; };
    v.derivative = [](double x) { return x * x * x - x; };
    // V' = x^3 - x is not globally Lipschitz.
    v.lipschitz = std::nullopt;
    v.beta = 1.0;
    v.radius = std::sqrt(2.0);
    return v;
  }
  std::vector<std::string> all = slow_names();
  for (auto& n : names_2d()) all.push_back(n);
  throw CatalogError(std::string(name), all);
}

FastPotential PotentialCatalog::fast(std::string_view name, double period) const {
  require_positive(period, "L");
  if (name == "cos") {
    const double k = 2.0 * kPi / period;
    return {"cos", [k](double y) { return std::cos(k * y); }, [k](double y) { return -k * std::sin(k * y); }, period};
  }
  if (name == "none") {
    return {"none", [](double) { return 0.0; }, [](double) { return 0.0; }, period};
  }
  throw CatalogError(std::string(name), fast_names());
}

SlowPotential2D PotentialCatalog::slow_2d(std::string_view name) const {
  if (!is_2d(name)) throw CatalogError(std::string(name), names_2d());
  SlowPotential2D v;
  v.name = "double-well-2d";
  v.value = [](Vec2 x) {
    return 0.25 * (x[0] * x[0] * x[0] * x[0] + x[1] * x[1] * x[1] * x[1]) - 0.5 * (x[0] * x[0] + x[1] * x[1]);
  };
  v.gradient = [](Vec2 x) { return Vec2{x[0] * x[0] * x[0] - x[0], x[1] * x[1] * x[1] - x[1]}; };
  return v;
}

FastPotential2D PotentialCatalog::fast_2d(std::string_view name) const {
  if (name == "2d-example") {
    return {"sin+sin2",
            [](Vec2 y) { return std::sin(y[0]) + std::sin(y[1]) * std::sin(y[1]); },
            [](Vec2 y) { return Vec2{std::cos(y[0]), 2.0 * std::sin(y[1]) * std::cos(y[1])}; },
            {2.0 * kPi, kPi}};
  }
  if (name == "2d-example-sin1") {
    return {"sin", [](Vec2 y) { return std::sin(y[0]); }, [](Vec2 y) { return Vec2{std::cos(y[0]), 0.0}; },
            {2.0 * kPi, 2.0 * kPi}};
  }
  throw CatalogError(std::string(name), names_2d());
}

const PotentialCatalog& builtin_potentials() {
  static const PotentialCatalog catalog;
  return catalog;
}

}  // namespace homodens::model
