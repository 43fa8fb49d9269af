#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "homodens/basis.hpp"
#include "homodens/error.hpp"
#include "homodens/model.hpp"
#include "homodens/numerics.hpp"

namespace hm = homodens::model;
namespace hn = homodens::numerics;

namespace {

constexpr double kPi = std::numbers::pi;

// Modified Bessel I_0 by its power series.
double bessel_i0(double x) {
  double term = 1.0, sum = 1.0;
  for (int k = 1; k < 60; ++k) {
    term *= (x / 2) * (x / 2) / (k * k);
    sum += term;
  }
  return sum;
}

const hm::PotentialCatalog& cat() { return hm::builtin_potentials(); }

hm::ProblemSpec double_well_cos(double eps, double sigma2 = 1.0) {
  return {cat().slow("double-well"), cat().fast("cos", 2 * kPi), sigma2, eps};
}

}  // namespace

TEST(Homogenize, ConstantFastPotential) {
  const auto m = hm::homogenize(cat().fast("none", 3.0), 0.7);
  EXPECT_NEAR(m.Pi, 3.0, 1e-13);
  EXPECT_NEAR(m.PiHat, 3.0, 1e-13);
  EXPECT_NEAR(m.K, 1.0, 1e-13);
  EXPECT_NEAR(m.Sigma, 0.7, 1e-13);
}

TEST(Homogenize, CosineMatchesBesselSeries) {
  const auto m = hm::homogenize(cat().fast("cos", 2 * kPi), 1.0);
  EXPECT_NEAR(m.Pi, 2 * kPi * bessel_i0(1.0), 1e-10);
  EXPECT_NEAR(m.Pi, 7.954926521, 1e-9);
  EXPECT_NEAR(m.PiHat, m.Pi, 1e-10);
  EXPECT_NEAR(m.K, 1.0 / std::pow(bessel_i0(1.0), 2), 1e-10);
  // Brute-force midpoint rule, spectrally accurate for periodic integrands.
  double s = 0.0;
  const int n = 4000;
  for (int i = 0; i < n; ++i) s += std::exp(-std::cos(2 * kPi * (i + 0.5) / n));
  EXPECT_NEAR(m.Pi, s * 2 * kPi / n, 1e-10);
}

TEST(Homogenize, CosineAtLargerVariance) {
  const auto m = hm::homogenize(cat().fast("cos", 2 * kPi), 4.0);
  EXPECT_NEAR(m.K, 1.0 / std::pow(bessel_i0(0.25), 2), 1e-10);
  EXPECT_DOUBLE_EQ(m.Sigma, m.K * 4.0);
}

TEST(Homogenize, InvariantUnderConstantShift) {
  auto p = cat().fast("cos", 2 * kPi);
  auto shifted = p;
  shifted.value = [](double y) { return std::cos(y) + 5.0; };
  const double k1 = hm::homogenize(p, 0.5).K;
  const double k2 = hm::homogenize(shifted, 0.5).K;
  EXPECT_NEAR(k1, k2, 1e-10);
  EXPECT_GT(k1, 0.0);
  EXPECT_LT(k1, 1.0);
}

TEST(ProblemSpec, ShiftsAndValidation) {
  auto slow = cat().slow("quadratic", 0.7);
  hm::ProblemSpec spec(slow, cat().fast("cos", 2 * kPi), 1.0, 0.1);
  EXPECT_EQ(spec.V(0.0), 0.0);
  EXPECT_EQ(spec.p(0.0), 0.0);
  EXPECT_NEAR(spec.p(kPi), -2.0, 1e-15);
  EXPECT_NEAR(spec.dV(0.7), 0.0, 1e-15);
  EXPECT_THROW(hm::ProblemSpec(slow, cat().fast("cos", 2 * kPi), 0.0, 0.1), homodens::ConfigError);
  EXPECT_THROW(hm::ProblemSpec(slow, cat().fast("cos", 2 * kPi), 1.0, -0.1), homodens::ConfigError);
  try {
    hm::ProblemSpec(slow, cat().fast("cos", 2 * kPi), 1.0, 0.0);
    FAIL();
  } catch (const homodens::ConfigError& e) {
    EXPECT_EQ(e.field(), "eps");
  }
  auto wrong = cat().fast("cos", 2 * kPi);
  wrong.period = 3.0;
  EXPECT_THROW(hm::ProblemSpec(slow, wrong, 1.0, 0.1), homodens::ConfigError);
}

TEST(ProblemSpec, TheoremConstants) {
  hm::ProblemSpec q(cat().slow("quadratic", 0.5), cat().fast("none"), 2.0, 0.1);
  EXPECT_DOUBLE_EQ(q.l_constant(), 1.5 / 2.0);
  EXPECT_DOUBLE_EQ(q.r_constant(), 0.25);
  EXPECT_TRUE(q.assumptions_hold());
  const auto dw = double_well_cos(0.1);
  EXPECT_TRUE(std::isinf(dw.l_constant()));
  EXPECT_FALSE(dw.assumptions_hold());
}

TEST(Catalog, Examples) {
  EXPECT_DOUBLE_EQ(cat().slow("double-well").value(1.0), -0.25);
  EXPECT_DOUBLE_EQ(cat().slow("quadratic", 0.7).derivative(0.7), 0.0);
  EXPECT_DOUBLE_EQ(cat().fast_2d("2d-example").value({kPi / 2, kPi / 2}), 2.0);
  EXPECT_TRUE(cat().is_2d("2d-example"));
  EXPECT_FALSE(cat().is_2d("double-well"));
}

TEST(Catalog, UnknownNameListsValidOnes) {
  try {
    cat().slow("triple-well");
    FAIL();
  } catch (const homodens::CatalogError& e) {
    EXPECT_EQ(e.field(), "potential");
    const auto& v = e.valid_names();
    EXPECT_NE(std::find(v.begin(), v.end(), "double-well"), v.end());
    EXPECT_NE(std::string(e.what()).find("double-well"), std::string::npos);
  }
  EXPECT_THROW(cat().fast("sawtooth"), homodens::CatalogError);
  EXPECT_THROW(cat().fast_2d("3d"), homodens::CatalogError);
}

TEST(Catalog, DerivativesMatchFiniteDifferences) {
  const double d = 1e-6;
  for (const auto& name : cat().slow_names()) {
    const auto v = cat().slow(name, 0.3);
    for (double x : {-1.7, 0.2, 2.4}) {
      EXPECT_NEAR(v.derivative(x), (v.value(x + d) - v.value(x - d)) / (2 * d), 1e-7) << name;
    }
  }
  const auto p = cat().fast("cos", 1.3);
  EXPECT_NEAR(p.derivative(0.4), (p.value(0.4 + d) - p.value(0.4 - d)) / (2 * d), 1e-7);
  for (const auto& name : cat().names_2d()) {
    const auto v2 = cat().slow_2d(name);
    const auto p2 = cat().fast_2d(name);
    const hm::Vec2 x{0.3, -1.1};
    const auto gv = v2.gradient(x);
    const auto gp = p2.gradient(x);
    for (int k = 0; k < 2; ++k) {
      hm::Vec2 a = x, b = x;
      a[k] += d;
      b[k] -= d;
      EXPECT_NEAR(gv[k], (v2.value(a) - v2.value(b)) / (2 * d), 1e-7);
      EXPECT_NEAR(gp[k], (p2.value(a) - p2.value(b)) / (2 * d), 1e-7);
    }
  }
}

TEST(ReferenceDensity, StandardNormal) {
  hm::ProblemSpec spec(cat().slow("quadratic"), cat().fast("none"), 1.0, 0.1);
  const auto rho = hm::reference_density(spec, hm::DensityKind::Homogenized);
  EXPECT_NEAR(rho.normalization(), std::sqrt(2 * kPi), 1e-12);
  for (double x : {-2.0, 0.0, 0.5, 3.0}) {
    EXPECT_NEAR(rho(x), std::exp(-x * x / 2) / std::sqrt(2 * kPi), 1e-14);
  }
  const auto [lo, hi] = rho.domain();
  EXPECT_LT(rho(hi) / rho(0.0), 1e-12);
  EXPECT_LT(lo, -7.0);
  EXPECT_EQ(rho.kind(), hm::DensityKind::Homogenized);
}

TEST(ReferenceDensity, DoubleWellSymmetric) {
  const auto rho = hm::reference_density(double_well_cos(0.1), hm::DensityKind::Homogenized);
  for (double x = 0.0; x <= 3.0; x += 0.01) EXPECT_NEAR(rho(x), rho(-x), 1e-12);
  EXPECT_NEAR(rho.normalization(), 3.90513716985730125, 1e-10);
}

TEST(ReferenceDensity, NormalizedToOne) {
  for (double eps : {0.2, 0.1, 0.05}) {
    for (auto kind : {hm::DensityKind::Homogenized, hm::DensityKind::Multiscale}) {
      const auto rho = hm::reference_density(double_well_cos(eps), kind);
      const double total = hm::integrate_line([&](double x) { return rho(x); }, rho.domain(),
                                              rho.feature_scale(), 1e-12);
      EXPECT_NEAR(total, 1.0, 1e-8) << eps;
      EXPECT_GT(rho(rho.domain().second), 0.0);
    }
  }
}

TEST(ReferenceDensity, MultiscaleNormalizationApproachesLimit) {
  const auto rho = hm::reference_density(double_well_cos(0.1), hm::DensityKind::Homogenized);
  // V and p are shifted to vanish at 0, so p = cos y - 1.
  auto p = cat().fast("cos", 2 * kPi);
  p.value = [](double y) { return std::cos(y) - 1.0; };
  const double limit = rho.normalization() * hm::homogenize(p, 1.0).Pi / (2 * kPi);
  double prev = hn::kInf;
  for (double eps : {0.2, 0.1, 0.05}) {
    const auto r = hm::reference_density(double_well_cos(eps), hm::DensityKind::Multiscale);
    const double gap = std::abs(r.normalization() - limit);
    EXPECT_LT(gap, prev) << eps;
    prev = gap;
  }
  EXPECT_LT(prev, 1e-6 * limit);
}

TEST(ReferenceDensity, WeakConvergenceOfProjections) {
  const auto rho = hm::reference_density(double_well_cos(0.1), hm::DensityKind::Homogenized);
  std::vector<double> prev(9, hn::kInf);
  for (double eps : {0.2, 0.1, 0.05}) {
    const auto r = hm::reference_density(double_well_cos(eps), hm::DensityKind::Multiscale);
    for (int n = 0; n <= 8; n += 2) {
      auto proj = [&](const hm::ReferenceDensity& d) {
        return hm::integrate_line([&](double x) { return homodens::basis::hermite_fn(n, x) * d(x); }, d.domain(),
                                  d.feature_scale(), 1e-13);
      };
      const double err = std::abs(proj(r) - proj(rho));
      EXPECT_LE(err, prev[n] + 1e-12) << "n=" << n << " eps=" << eps;
      prev[n] = err;
    }
  }
}

TEST(ReferenceDensity, NonConfiningPotentialRejected) {
  hm::SlowPotential flat{"flat", [](double) { return 0.0; }, [](double) { return 0.0; }, 0.0, 0.0, 1.0};
  hm::ProblemSpec spec(flat, cat().fast("none"), 1.0, 0.1);
  EXPECT_THROW(hm::reference_density(spec, hm::DensityKind::Homogenized), homodens::NumericalError);
}

TEST(ReferenceDensity2D, NormalizedOnBox) {
  hm::ProblemSpec2D spec(cat().slow_2d("2d-example"), cat().fast_2d("2d-example"), 2.25, 0.1);
  const auto rho = hm::reference_density(spec, hm::DensityKind::Homogenized);
  const double b = rho.box_half_width();
  const hn::Box2D box{hn::Grid1D(-b, b, 801), hn::Grid1D(-b, b, 801)};
  std::vector<double> v;
  for (double x1 : box.x1.points()) {
    for (double x2 : box.x2.points()) v.push_back(rho(x1, x2));
  }
  EXPECT_NEAR(hn::trapezoid(v, box), 1.0, 1e-8);
  EXPECT_NEAR(rho(1.0, 1.0), rho(-1.0, 1.0), 1e-14);
  EXPECT_GT(rho(1.0, 1.0), rho(0.0, 0.0));
}

TEST(ReferenceDensity2D, MultiscaleNormalized) {
  hm::ProblemSpec2D spec(cat().slow_2d("2d-example"), cat().fast_2d("2d-example"), 2.25, 0.1);
  const auto rho = hm::reference_density(spec, hm::DensityKind::Multiscale);
  const double b = rho.box_half_width();
  const hn::Box2D box{hn::Grid1D(-b, b, 2001), hn::Grid1D(-b, b, 2001)};
  std::vector<double> v;
  v.reserve(box.x1.count * box.x2.count);
  for (double x1 : box.x1.points()) {
    for (double x2 : box.x2.points()) v.push_back(rho(x1, x2));
  }
  EXPECT_NEAR(hn::trapezoid(v, box), 1.0, 1e-6);
}
