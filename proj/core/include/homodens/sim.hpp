#pragma once

// Euler-Maruyama integration of the multiscale and homogenized SDEs with
// states streamed to observers, plus the on-disk trajectory format.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "homodens/model.hpp"

namespace homodens::sim {

// Normal increments: std::mt19937_64 fed through std::normal_distribution
// (Marsaglia polar method in libstdc++). Bit-exact within one build only.
inline constexpr std::string_view kPrngIdentity = "mt19937_64/std::normal_distribution";

enum class Mode { Multiscale, Homogenized };

std::string_view to_string(Mode mode);
Mode parse_mode(std::string_view text);

struct SimConfig {
  double T = 1.0;
  double h = 1e-3;
  std::uint64_t seed = 0;
  double burn_in = 0.0;
  // Testing only: drop the noise term so a run is deterministic.
  bool zero_noise = false;
};

// h = eps^3.
SimConfig default_config(double eps, double T, std::uint64_t seed);

// Per-worker stream seed for ensembles.
constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) { return base ^ index; }

// Receives every post-burn-in state exactly once, in time order. `weight` is
// the length of the time step that starts at this state (0 for the final
// state), so a left-Riemann time average is sum(weight * f) / sum(weight).
class Observer {
 public:
  virtual ~Observer() = default;
  virtual void observe(double t, std::span<const double> state, double weight) = 0;
};

struct SimSummary {
  std::size_t steps = 0;     // Euler steps taken
  std::size_t observed = 0;  // states handed to observers
  std::vector<double> min_state;
  std::vector<double> max_state;
  std::uint64_t seed = 0;
  double h = 0.0;
  double T = 0.0;
  // T is not an integer multiple of h; the run stops at floor(T/h) h.
  bool horizon_truncated = false;
  std::vector<std::string> warnings;
};

// 1D. Homogenized mode needs `homogenized` (drift -K V', diffusion sqrt(2 Sigma)).
// Throws DivergenceError on a non-finite state and ConfigError on invalid
// configuration.
SimSummary euler_maruyama(const model::ProblemSpec& spec, const SimConfig& cfg, Mode mode,
                          std::span<Observer* const> observers,
                          const model::HomogenizedModel* homogenized = nullptr);

// 2D, multiscale mode only (the 2D homogenized coefficient is a matrix that is
// not computed here).
SimSummary euler_maruyama(const model::ProblemSpec2D& spec, const SimConfig& cfg,
                          std::span<Observer* const> observers);

// Trajectory files.
//
//   #homodens traj v1 dim=<d> h=<h> seed=<s> mode=<m>
//   t,x            (or t,x1,x2)
//
// with 17 significant digits, or the same header line followed by raw
// little-endian float64 records of d + 1 values per state.

enum class Encoding { Csv, Raw };

struct TrajectoryHeader {
  int dim = 1;
  double h = 0.0;
  std::uint64_t seed = 0;
  Mode mode = Mode::Multiscale;
};

std::string format_header(const TrajectoryHeader& header);
TrajectoryHeader parse_header(std::string_view line);

// Encoding implied by a path: ".bin" or ".raw" is raw, anything else CSV.
Encoding encoding_for(const std::filesystem::path& path);

class TrajectoryWriter final : public Observer {
 public:
  TrajectoryWriter(const std::filesystem::path& path, const TrajectoryHeader& header, Encoding encoding);
  void observe(double t, std::span<const double> state, double weight) override;
  void close();
  std::size_t rows() const noexcept { return rows_; }

 private:
  std::filesystem::path path_;
  std::ofstream out_;
  TrajectoryHeader header_;
  Encoding encoding_;
  std::size_t rows_ = 0;
  char buffer_[128];
};

class TrajectoryReader {
 public:
  TrajectoryReader(const std::filesystem::path& path, Encoding encoding);
  explicit TrajectoryReader(const std::filesystem::path& path) : TrajectoryReader(path, encoding_for(path)) {}

  const TrajectoryHeader& header() const noexcept { return header_; }
  // Reads the next row into t and state (state.size() == dim). Returns false
  // at end of file.
  bool next(double& t, std::span<double> state);

 private:
  std::filesystem::path path_;
  std::ifstream in_;
  TrajectoryHeader header_;
  Encoding encoding_;
  std::string line_;
  std::size_t line_no_ = 1;
};

// Streams a stored trajectory to observers with weight h on every state but
// the last. Returns the number of states.
std::size_t replay(const std::filesystem::path& path, std::span<Observer* const> observers);

SimSummary simulate_to_file(const model::ProblemSpec& spec, const SimConfig& cfg, Mode mode,
                            const std::filesystem::path& path,
                            const model::HomogenizedModel* homogenized = nullptr);
SimSummary simulate_to_file(const model::ProblemSpec2D& spec, const SimConfig& cfg,
                            const std::filesystem::path& path);

}  // namespace homodens::sim
