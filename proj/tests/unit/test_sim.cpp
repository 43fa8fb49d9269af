#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <vector>

#include <unistd.h>

#include <gtest/gtest.h>

#include "homodens/basis.hpp"
#include "homodens/error.hpp"
#include "homodens/model.hpp"
#include "homodens/sim.hpp"

namespace hm = homodens::model;
namespace hs = homodens::sim;
namespace fs = std::filesystem;

namespace {

constexpr double kPi = std::numbers::pi;

const hm::PotentialCatalog& cat() { return hm::builtin_potentials(); }

struct Recorder final : hs::Observer {
  std::vector<double> t, x, w;
  std::size_t dim = 0;
  void observe(double tt, std::span<const double> s, double ww) override {
    dim = s.size();
    t.push_back(tt);
    for (double v : s) x.push_back(v);
    w.push_back(ww);
  }
};

// Time average of f with batch-means standard error.
struct BatchMean final : hs::Observer {
  explicit BatchMean(std::function<double(double)> f_, double batch_) : f(std::move(f_)), batch(batch_) {}
  std::function<double(double)> f;
  double batch;
  double acc = 0.0, acc_w = 0.0;
  std::vector<double> means;
  void observe(double, std::span<const double> s, double w) override {
    acc += w * f(s[0]);
    acc_w += w;
    if (acc_w >= batch) {
      means.push_back(acc / acc_w);
      acc = acc_w = 0.0;
    }
  }
  double mean() const {
    double m = 0.0;
    for (double v : means) m += v;
    return m / means.size();
  }
  double stderr_() const {
    const double m = mean();
    double v = 0.0;
    for (double b : means) v += (b - m) * (b - m);
    return std::sqrt(v / (means.size() - 1) / means.size());
  }
};

fs::path temp_path(const std::string& name) {
  return fs::temp_directory_path() / ("homodens_test_" + std::to_string(::getpid()) + "_" + name);
}

hm::ProblemSpec ou(double mu = 0.0, double x0 = 0.0) {
  return {cat().slow("quadratic", mu), cat().fast("none"), 1.0, 0.1, x0};
}

hm::ProblemSpec double_well_cos(double eps) {
  return {cat().slow("double-well"), cat().fast("cos", 2 * kPi), 1.0, eps};
}

}  // namespace

TEST(EulerMaruyama, DeterministicStep) {
  hs::SimConfig cfg{0.1, 0.1, 0, 0.0, true};
  Recorder rec;
  hs::Observer* obs[] = {&rec};
  const auto s = hs::euler_maruyama(ou(0.0, 1.0), cfg, hs::Mode::Multiscale, obs);
  ASSERT_EQ(rec.x.size(), 2u);
  EXPECT_EQ(rec.x[0], 1.0);
  EXPECT_NEAR(rec.x[1], 0.9, 1e-15);
  EXPECT_EQ(s.steps, 1u);
  EXPECT_EQ(s.observed, 2u);
}

TEST(EulerMaruyama, StreamInvariants) {
  const auto cfg = hs::default_config(0.1, 0.5, 3);
  EXPECT_DOUBLE_EQ(cfg.h, 1e-3);
  Recorder rec;
  hs::Observer* obs[] = {&rec};
  const auto s = hs::euler_maruyama(double_well_cos(0.1), cfg, hs::Mode::Multiscale, obs);
  EXPECT_EQ(s.steps, 500u);
  EXPECT_FALSE(s.horizon_truncated);
  ASSERT_EQ(rec.t.size(), 501u);
  EXPECT_EQ(rec.t[0], 0.0);
  EXPECT_EQ(rec.x[0], 0.0);
  for (std::size_t k = 0; k < rec.t.size(); ++k) EXPECT_EQ(rec.t[k], k * cfg.h);
  double total = 0.0;
  for (double w : rec.w) total += w;
  EXPECT_NEAR(total, 0.5, 1e-12);
  EXPECT_EQ(rec.w.back(), 0.0);
  EXPECT_EQ(s.min_state[0], *std::min_element(rec.x.begin(), rec.x.end()));
  EXPECT_EQ(s.max_state[0], *std::max_element(rec.x.begin(), rec.x.end()));
  EXPECT_EQ(s.seed, 3u);
}

TEST(EulerMaruyama, Reproducible) {
  const auto cfg = hs::default_config(0.1, 2.0, 99);
  Recorder a, b, c;
  hs::Observer* oa[] = {&a};
  hs::Observer* ob[] = {&b};
  hs::Observer* oc[] = {&c};
  hs::euler_maruyama(double_well_cos(0.1), cfg, hs::Mode::Multiscale, oa);
  hs::euler_maruyama(double_well_cos(0.1), cfg, hs::Mode::Multiscale, ob);
  auto other = cfg;
  other.seed = 100;
  hs::euler_maruyama(double_well_cos(0.1), other, hs::Mode::Multiscale, oc);
  EXPECT_EQ(a.x, b.x);
  EXPECT_NE(a.x, c.x);
}

TEST(EulerMaruyama, HorizonTruncationAndDegenerateHorizon) {
  hs::SimConfig cfg{0.25, 0.1, 1};
  Recorder rec;
  hs::Observer* obs[] = {&rec};
  auto s = hs::euler_maruyama(ou(), cfg, hs::Mode::Multiscale, obs);
  EXPECT_EQ(s.steps, 2u);
  EXPECT_TRUE(s.horizon_truncated);
  Recorder one;
  hs::Observer* o1[] = {&one};
  s = hs::euler_maruyama(ou(0.0, 0.3), hs::SimConfig{0.05, 0.1, 1}, hs::Mode::Multiscale, o1);
  EXPECT_EQ(s.steps, 0u);
  ASSERT_EQ(one.x.size(), 1u);
  EXPECT_EQ(one.x[0], 0.3);
  EXPECT_EQ(one.w[0], 0.0);
}

TEST(EulerMaruyama, StepCountAtExperimentScale) {
  // 50 / 0.1^3 steps despite 0.1^3 not being exactly representable.
  const auto cfg = hs::default_config(0.1, 50.0, 1);
  struct Counter final : hs::Observer {
    std::size_t n = 0;
    void observe(double, std::span<const double>, double) override { ++n; }
  } counter;
  hs::Observer* obs[] = {&counter};
  const auto s = hs::euler_maruyama(double_well_cos(0.1), cfg, hs::Mode::Multiscale, obs);
  EXPECT_EQ(s.steps, 50000u);
  EXPECT_EQ(counter.n, 50001u);
  EXPECT_TRUE(std::isfinite(s.min_state[0]) && std::isfinite(s.max_state[0]));
}

TEST(EulerMaruyama, DoubleWellRunStaysBounded) {
  hs::SimConfig cfg{50.0, 1e-3, 42};
  Recorder rec;
  hs::Observer* obs[] = {&rec};
  const auto s = hs::euler_maruyama(double_well_cos(0.1), cfg, hs::Mode::Multiscale, obs);
  for (double v : rec.x) {
    ASSERT_TRUE(std::isfinite(v));
    ASSERT_LT(std::abs(v), 5.0);
  }
  EXPECT_TRUE(s.warnings.empty());
  // Both wells are visited.
  EXPECT_LT(s.min_state[0], -0.8);
  EXPECT_GT(s.max_state[0], 0.8);
}

TEST(EulerMaruyama, BurnIn) {
  hs::SimConfig cfg{1.0, 0.1, 5, 0.45};
  Recorder rec;
  hs::Observer* obs[] = {&rec};
  const auto s = hs::euler_maruyama(ou(), cfg, hs::Mode::Multiscale, obs);
  EXPECT_EQ(s.steps, 10u);
  ASSERT_EQ(s.observed, 6u);
  EXPECT_NEAR(rec.t.front(), 0.5, 1e-15);
}

TEST(EulerMaruyama, ConfigErrors) {
  Recorder rec;
  hs::Observer* obs[] = {&rec};
  EXPECT_THROW(hs::euler_maruyama(ou(), hs::SimConfig{1.0, 0.0, 1}, hs::Mode::Multiscale, obs), homodens::ConfigError);
  EXPECT_THROW(hs::euler_maruyama(ou(), hs::SimConfig{-1.0, 0.1, 1}, hs::Mode::Multiscale, obs), homodens::ConfigError);
  EXPECT_THROW(hs::euler_maruyama(ou(), hs::SimConfig{1.0, 0.1, 1}, hs::Mode::Homogenized, obs), homodens::ConfigError);
  EXPECT_THROW(hs::parse_mode("fast"), homodens::ConfigError);
  EXPECT_EQ(hs::parse_mode("homogenized"), hs::Mode::Homogenized);
}

TEST(EulerMaruyama, CoarseStepWarns) {
  Recorder rec;
  hs::Observer* obs[] = {&rec};
  const auto s = hs::euler_maruyama(double_well_cos(0.1), hs::SimConfig{0.1, 0.005, 1}, hs::Mode::Multiscale, obs);
  ASSERT_EQ(s.warnings.size(), 1u);
  EXPECT_NE(s.warnings[0].find("eps^2/10"), std::string::npos);
}

TEST(EulerMaruyama, DivergenceReportsLastFiniteState) {
  hm::SlowPotential steep{"steep", [](double x) { return std::pow(x, 6); }, [](double x) { return 6 * std::pow(x, 5); },
                          std::nullopt, 1.0, 1.0};
  hm::ProblemSpec spec(steep, cat().fast("none"), 1.0, 0.1, 10.0);
  Recorder rec;
  hs::Observer* obs[] = {&rec};
  try {
    hs::euler_maruyama(spec, hs::SimConfig{10.0, 0.1, 1, 0.0, true}, hs::Mode::Multiscale, obs);
    FAIL() << "expected divergence";
  } catch (const homodens::DivergenceError& e) {
    EXPECT_GE(e.step(), 1u);
    ASSERT_EQ(e.last_finite_state().size(), 1u);
    EXPECT_TRUE(std::isfinite(e.last_finite_state()[0]));
    EXPECT_EQ(e.last_finite_state()[0], rec.x.back());
  }
}

TEST(EulerMaruyama, OrnsteinUhlenbeckEnsembleMean) {
  // x0 = 1, T = 50: the exact mean e^{-50} is zero for all purposes.
  const int paths = 10000;
  const hs::SimConfig base{50.0, 0.05, 2024};
  double sum = 0.0, sum2 = 0.0;
  struct Last final : hs::Observer {
    double x = 0.0;
    void observe(double, std::span<const double> s, double) override { x = s[0]; }
  };
  const auto spec = ou(0.0, 1.0);
  for (int i = 0; i < paths; ++i) {
    auto cfg = base;
    cfg.seed = hs::derive_seed(base.seed, static_cast<std::uint64_t>(i));
    Last last;
    hs::Observer* obs[] = {&last};
    hs::euler_maruyama(spec, cfg, hs::Mode::Multiscale, obs);
    sum += last.x;
    sum2 += last.x * last.x;
  }
  const double mean = sum / paths;
  const double var = sum2 / paths - mean * mean;
  EXPECT_LT(std::abs(mean), 3.0 * std::sqrt(var / paths));
  // Euler-Maruyama stationary variance 1 / (1 - h/2).
  EXPECT_NEAR(var, 1.0 / (1.0 - 0.025), 0.05);
}

TEST(EulerMaruyama, OrnsteinUhlenbeckTimeAverage) {
  const double mu = 0.7;
  BatchMean bm([](double x) { return x; }, 20.0);
  hs::Observer* obs[] = {&bm};
  hs::euler_maruyama(ou(mu), hs::SimConfig{1000.0, 0.01, 8}, hs::Mode::Multiscale, obs);
  EXPECT_LT(std::abs(bm.mean() - mu), 5.0 * bm.stderr_());
}

TEST(EulerMaruyama, HomogenizedLimitOfGroundStateAverage) {
  const double eps = 0.05;
  const auto spec = double_well_cos(eps);
  const auto hom = hm::homogenize(spec.fast(), spec.sigma2());
  auto psi0 = [](double x) { return homodens::basis::hermite_fn(0, x); };
  BatchMean ms(psi0, 50.0), hg(psi0, 50.0);
  hs::Observer* o1[] = {&ms};
  hs::Observer* o2[] = {&hg};
  hs::euler_maruyama(spec, hs::default_config(eps, 2000.0, 11), hs::Mode::Multiscale, o1);
  hs::euler_maruyama(spec, hs::SimConfig{2000.0, 1e-3, 12}, hs::Mode::Homogenized, o2, &hom);
  const double se = std::hypot(ms.stderr_(), hg.stderr_());
  EXPECT_LT(std::abs(ms.mean() - hg.mean()), 4.0 * se) << ms.mean() << " vs " << hg.mean() << " se " << se;
}

TEST(EulerMaruyama, TwoDimensional) {
  hm::ProblemSpec2D spec(cat().slow_2d("2d-example"), cat().fast_2d("2d-example"), 2.25, 0.1);
  Recorder rec;
  hs::Observer* obs[] = {&rec};
  const auto s = hs::euler_maruyama(spec, hs::default_config(0.1, 1.0, 4), obs);
  EXPECT_EQ(rec.dim, 2u);
  EXPECT_EQ(rec.x.size(), 2 * (s.steps + 1));
  EXPECT_EQ(s.min_state.size(), 2u);
}

TEST(TrajectoryFile, HeaderRoundTrip) {
  const hs::TrajectoryHeader h{2, 0.001, 18446744073709551615ull, hs::Mode::Homogenized};
  const auto line = hs::format_header(h);
  EXPECT_EQ(line.rfind("#homodens traj v1 dim=2 h=", 0), 0u);
  const auto back = hs::parse_header(line);
  EXPECT_EQ(back.dim, 2);
  EXPECT_EQ(back.h, 0.001);
  EXPECT_EQ(back.seed, h.seed);
  EXPECT_EQ(back.mode, hs::Mode::Homogenized);
  EXPECT_THROW(hs::parse_header("t,x"), homodens::IoError);
  EXPECT_THROW(hs::parse_header("#homodens traj v1 dim=3 h=1 seed=1 mode=multiscale"), homodens::IoError);
  EXPECT_THROW(hs::parse_header("#homodens traj v1 dim=1 h=1"), homodens::IoError);
}

TEST(TrajectoryFile, RoundTripIsBitExact) {
  for (const char* name : {"rt.csv", "rt.bin"}) {
    const auto path = temp_path(name);
    const auto cfg = hs::default_config(0.1, 0.3, 17);
    const auto spec = double_well_cos(0.1);
    const auto s = hs::simulate_to_file(spec, cfg, hs::Mode::Multiscale, path);
    Recorder direct;
    hs::Observer* obs[] = {&direct};
    hs::euler_maruyama(spec, cfg, hs::Mode::Multiscale, obs);

    hs::TrajectoryReader reader(path);
    EXPECT_EQ(reader.header().seed, 17u);
    EXPECT_EQ(reader.header().h, cfg.h);
    double t;
    double x[1];
    std::size_t k = 0;
    while (reader.next(t, x)) {
      ASSERT_LT(k, direct.t.size());
      EXPECT_EQ(t, direct.t[k]);
      EXPECT_EQ(x[0], direct.x[k]);
      ++k;
    }
    EXPECT_EQ(k, s.steps + 1);

    Recorder replayed;
    hs::Observer* ro[] = {&replayed};
    EXPECT_EQ(hs::replay(path, ro), s.steps + 1);
    EXPECT_EQ(replayed.x, direct.x);
    EXPECT_EQ(replayed.w, direct.w);
    fs::remove(path);
  }
}

TEST(TrajectoryFile, TwoDimensionalRowsHaveThreeColumns) {
  const auto path = temp_path("2d.csv");
  hm::ProblemSpec2D spec(cat().slow_2d("2d-example"), cat().fast_2d("2d-example"), 2.25, 0.1);
  hs::simulate_to_file(spec, hs::default_config(0.1, 0.01, 1), path);
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  EXPECT_NE(line.find("dim=2"), std::string::npos);
  int rows = 0;
  while (std::getline(in, line)) {
    EXPECT_EQ(std::count(line.begin(), line.end(), ','), 2);
    ++rows;
  }
  EXPECT_EQ(rows, 11);
  fs::remove(path);
}

TEST(TrajectoryFile, ShortHorizonHoldsInitialStateOnly) {
  const auto path = temp_path("short.csv");
  hs::simulate_to_file(ou(0.0, 0.25), hs::SimConfig{0.01, 0.1, 1}, hs::Mode::Multiscale, path);
  std::ifstream in(path);
  std::string header, row, extra;
  ASSERT_TRUE(std::getline(in, header));
  ASSERT_TRUE(std::getline(in, row));
  EXPECT_EQ(row, "0,0.25");
  EXPECT_FALSE(std::getline(in, extra));
  fs::remove(path);
}

TEST(TrajectoryFile, Errors) {
  EXPECT_THROW(hs::simulate_to_file(ou(), hs::SimConfig{0.1, 0.1, 1}, hs::Mode::Multiscale,
                                    "/nonexistent-dir/x.csv"),
               homodens::IoError);
  EXPECT_THROW(hs::TrajectoryReader("/nonexistent-dir/x.csv"), homodens::IoError);
  const auto path = temp_path("bad.csv");
  {
    std::ofstream out(path);
    out << hs::format_header({1, 0.1, 1, hs::Mode::Multiscale}) << "\n0,1\n0.1,abc\n";
  }
  hs::TrajectoryReader reader(path);
  double t, x[1];
  EXPECT_TRUE(reader.next(t, x));
  EXPECT_THROW(reader.next(t, x), homodens::IoError);
  fs::remove(path);
}

TEST(Seeds, DerivedSeedsDiffer) {
  EXPECT_EQ(hs::derive_seed(42, 0), 42u);
  EXPECT_NE(hs::derive_seed(42, 1), hs::derive_seed(42, 2));
  EXPECT_EQ(hs::kPrngIdentity, "mt19937_64/std::normal_distribution");
}
