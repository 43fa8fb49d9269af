#pragma once

// Run configuration shared by every subcommand. See README for the schema.

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "homodens/model.hpp"
#include "homodens/numerics.hpp"
#include "homodens/sim.hpp"

namespace homodens::cli {

struct GridConfig {
  double lo = -2.5;
  double hi = 2.5;
  std::size_t count = 1001;
};

struct RunConfig {
  std::string potential = "double-well";
  std::string fast = "cos";
  double L = 2.0 * 3.14159265358979323846;
  double mu = 0.0;
  double eps = 0.1;
  double sigma2 = 1.0;
  double T = 0.0;
  std::optional<double> h;  // unset means eps^3
  std::uint64_t seed = 1;
  int N = 16;
  GridConfig grid;
  sim::Mode mode = sim::Mode::Multiscale;
  std::array<double, 2> x0{0.0, 0.0};
  double burn_in = 0.0;

  bool is_2d() const;
  int dim() const { return is_2d() ? 2 : 1; }
  double step() const;

  model::ProblemSpec problem() const;
  model::ProblemSpec2D problem_2d() const;
  sim::SimConfig sim_config() const;
  numerics::Grid1D grid_1d() const;
  numerics::Box2D grid_2d() const;
};

// Missing or malformed fields raise ConfigError naming the field. `require_T`
// is false for commands that never simulate.
RunConfig parse_config(const nlohmann::json& j, bool require_T = true);
// Accepts either a bare config or a manifest holding one under "config".
RunConfig load_config(const std::filesystem::path& path, bool require_T = true);
nlohmann::json to_json(const RunConfig& cfg);

}  // namespace homodens::cli
