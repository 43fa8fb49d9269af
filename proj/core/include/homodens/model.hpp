#pragma once

// Potentials, homogenization constants and the exact invariant densities of
// the multiscale Langevin diffusion
//
//   dX = -V'(X) dt - (1/eps) p'(X/eps) dt + sqrt(2 sigma2) dW
//
// and of its homogenized limit dX = -K V'(X) dt + sqrt(2 K sigma2) dW.
// Every density uses the Gibbs exponent 1/sigma2.

#include <array>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace homodens::model {

using Vec2 = std::array<double, 2>;

// Slow confining potential V together with the constants of the dissipativity
// assumption: V' globally Lipschitz with constant L_V, and
// -sign(x) V'(x) <= -beta |x| for |x| >= R. A missing Lipschitz constant marks
// a potential outside that assumption (the double well); theorem-derived
// quantities for it are formal only.
struct SlowPotential {
  std::string name;
  std::function<double(double)> value;
  std::function<double(double)> derivative;
  std::optional<double> lipschitz;
  double beta = 0.0;
  double radius = 1.0;
};

// Fast potential p, periodic with period `period`.
struct FastPotential {
  std::string name;
  std::function<double(double)> value;
  std::function<double(double)> derivative;
  double period = 0.0;
};

struct SlowPotential2D {
  std::string name;
  std::function<double(Vec2)> value;
  std::function<Vec2(Vec2)> gradient;
};

struct FastPotential2D {
  std::string name;
  std::function<double(Vec2)> value;
  std::function<Vec2(Vec2)> gradient;
  Vec2 periods{};
};

// One instance of the 1D multiscale problem. Construction validates
// sigma2 > 0, eps > 0, period > 0, checks periodicity of p numerically and
// shifts V and p so that V(0) = p(0) = 0.
class ProblemSpec {
 public:
  ProblemSpec(SlowPotential slow, FastPotential fast, double sigma2, double eps, double x0 = 0.0);

  double V(double x) const { return slow_.value(x) - v_shift_; }
  double dV(double x) const { return slow_.derivative(x); }
  double p(double y) const { return fast_.value(y) - p_shift_; }
  double dp(double y) const { return fast_.derivative(y); }

  const SlowPotential& slow() const noexcept { return slow_; }
  const FastPotential& fast() const noexcept { return fast_; }
  double period() const noexcept { return fast_.period; }
  double sigma2() const noexcept { return sigma2_; }
  double eps() const noexcept { return eps_; }
  double x0() const noexcept { return x0_; }
  std::string name() const { return slow_.name + "/" + fast_.name; }

  // Convergence-rate constants l = (L_V + |V'(0)|)/sigma2 and r = beta/sigma2. l is
  // +inf when V' is not globally Lipschitz.
  double l_constant() const;
  double r_constant() const;
  bool assumptions_hold() const noexcept { return slow_.lipschitz.has_value(); }

 private:
  SlowPotential slow_;
  FastPotential fast_;
  double sigma2_;
  double eps_;
  double x0_;
  double v_shift_ = 0.0;
  double p_shift_ = 0.0;
};

class ProblemSpec2D {
 public:
  ProblemSpec2D(SlowPotential2D slow, FastPotential2D fast, double sigma2, double eps, Vec2 x0 = {0.0, 0.0});

  double V(Vec2 x) const { return slow_.value(x) - v_shift_; }
  Vec2 gradV(Vec2 x) const { return slow_.gradient(x); }
  double p(Vec2 y) const { return fast_.value(y) - p_shift_; }
  Vec2 gradp(Vec2 y) const { return fast_.gradient(y); }

  const SlowPotential2D& slow() const noexcept { return slow_; }
  const FastPotential2D& fast() const noexcept { return fast_; }
  double sigma2() const noexcept { return sigma2_; }
  double eps() const noexcept { return eps_; }
  Vec2 x0() const noexcept { return x0_; }
  std::string name() const { return slow_.name + "/" + fast_.name; }

 private:
  SlowPotential2D slow_;
  FastPotential2D fast_;
  double sigma2_;
  double eps_;
  Vec2 x0_;
  double v_shift_ = 0.0;
  double p_shift_ = 0.0;
};

struct HomogenizedModel {
  double Pi = 0.0;     // int_0^L e^{-p/sigma2}
  double PiHat = 0.0;  // int_0^L e^{+p/sigma2}
  double K = 0.0;      // L^2 / (Pi * PiHat)
  double Sigma = 0.0;  // K * sigma2
};

// Throws NumericalError if either cell integral fails to converge.
HomogenizedModel homogenize(const FastPotential& fast, double sigma2);

enum class DensityKind { Homogenized, Multiscale };

std::string_view to_string(DensityKind kind);

// rho(x) = e^{-V(x)/sigma2} / Z or rho_eps(x) = e^{-(V(x) + p(x/eps))/sigma2} / Z_eps.
// The normalization is computed once at construction.
class ReferenceDensity {
 public:
  DensityKind kind() const noexcept { return kind_; }
  double normalization() const noexcept { return Z_; }
  // Symmetric interval outside which the density is below 1e-12 of its peak.
  std::pair<double, double> domain() const noexcept { return domain_; }
  // Length scale of the finest oscillation (L * eps for rho_eps, 0 otherwise).
  double feature_scale() const noexcept { return feature_scale_; }

  double operator()(double x) const { return std::exp(-energy_(x) / sigma2_) / Z_; }

 private:
  friend ReferenceDensity reference_density(const ProblemSpec& spec, DensityKind kind);
  ReferenceDensity() = default;

  DensityKind kind_ = DensityKind::Homogenized;
  std::function<double(double)> energy_;
  double sigma2_ = 1.0;
  double Z_ = 1.0;
  std::pair<double, double> domain_{-1.0, 1.0};
  double feature_scale_ = 0.0;
};

// Throws NumericalError when e^{-V/sigma2} is not integrable.
ReferenceDensity reference_density(const ProblemSpec& spec, DensityKind kind);

class ReferenceDensity2D {
 public:
  DensityKind kind() const noexcept { return kind_; }
  double normalization() const noexcept { return Z_; }
  // Half-width b of the truncated box [-b, b]^2 used for normalization.
  double box_half_width() const noexcept { return half_width_; }

  double operator()(double x1, double x2) const {
    return std::exp(-energy_(Vec2{x1, x2}) / sigma2_) / Z_;
  }

 private:
  friend ReferenceDensity2D reference_density(const ProblemSpec2D& spec, DensityKind kind);
  ReferenceDensity2D() = default;

  DensityKind kind_ = DensityKind::Homogenized;
  std::function<double(Vec2)> energy_;
  double sigma2_ = 1.0;
  double Z_ = 1.0;
  double half_width_ = 1.0;
};

ReferenceDensity2D reference_density(const ProblemSpec2D& spec, DensityKind kind);

// Integrates f over the real line, resolving features of size `feature_scale`
// inside [lo, hi] and the tails outside. Shared by normalizations and
// projections onto the Hermite basis.
double integrate_line(const std::function<double(double)>& f, std::pair<double, double> core,
                      double feature_scale, double abs_tol, double rel_tol = 0.0);

// Named potentials.
//
//   1D slow:  "quadratic" (x - mu)^2 / 2, "double-well" x^4/4 - x^2/2
//   1D fast:  "cos" cos(2 pi y / L), "none" p = 0
//   2D:       "2d-example"  V = (x1^4 + x2^4)/4 - (x1^2 + x2^2)/2,
//                           p = sin(y1) + sin^2(y2)
//             "2d-example-sin1"  same V, p = sin(y1)
class PotentialCatalog {
 public:
  std::vector<std::string> slow_names() const;
  std::vector<std::string> fast_names() const;
  std::vector<std::string> names_2d() const;

  // Throws CatalogError for unknown names.
  SlowPotential slow(std::string_view name, double mu = 0.0) const;
  FastPotential fast(std::string_view name, double period = 2.0 * 3.14159265358979323846) const;
  SlowPotential2D slow_2d(std::string_view name) const;
  FastPotential2D fast_2d(std::string_view name) const;

  bool is_2d(std::string_view name) const;
};

const PotentialCatalog& builtin_potentials();

}  // namespace homodens::model
