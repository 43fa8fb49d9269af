#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace homodens::cli {

std::string tool_version();
std::string utc_timestamp();
// Lowercase hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);

// One manifest.json per output directory: config snapshot, tool version,
// PRNG identity, start/finish timestamps and a digest of every output.
class Manifest {
 public:
  Manifest(std::string command, nlohmann::json config);

  void add_output(const std::filesystem::path& path) { outputs_.push_back(path); }
  nlohmann::json& results() { return results_; }

  // Digests outputs relative to `dir` and writes dir/manifest.json.
  void write(const std::filesystem::path& dir) const;

 private:
  std::string command_;
  nlohmann::json config_;
  std::string started_;
  std::vector<std::filesystem::path> outputs_;
  nlohmann::json results_ = nlohmann::json::object();
};

}  // namespace homodens::cli
