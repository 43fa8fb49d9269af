#include "manifest.hpp"

#include <array>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <memory>

#include <openssl/evp.h>

#include "homodens/error.hpp"
#include "homodens/sim.hpp"

#ifndef HOMODENS_VERSION_STRING
#define HOMODENS_VERSION_STRING "0.0.0"
#endif

namespace homodens::cli {

std::string tool_version() { return HOMODENS_VERSION_STRING; }

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for hashing");
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) throw IoError("sha256 init failed");
  std::array<char, 1 << 16> buf;
  while (in) {
    in.read(buf.data(), buf.size());
    if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), md, &len);
  std::string hex;
  hex.reserve(2 * len);
  char two[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(two, sizeof two, "%02x", md[i]);
    hex += two;
  }
  return hex;
}

Manifest::Manifest(std::string command, nlohmann::json config)
    : command_(std::move(command)), config_(std::move(config)), started_(utc_timestamp()) {}

void Manifest::write(const std::filesystem::path& dir) const {
  nlohmann::json j;
  j["command"] = command_;
  j["config"] = config_;
  j["tool"] = {{"name", "homodens-cli"}, {"version", tool_version()}};
  j["prng"] = std::string(sim::kPrngIdentity);
  j["started"] = started_;
  j["finished"] = utc_timestamp();
  auto outs = nlohmann::json::object();
  for (const auto& p : outputs_) outs[std::filesystem::relative(p, dir).generic_string()] = {{"sha256", sha256_file(p)}};
  j["outputs"] = outs;
  j["results"] = results_;
  const auto path = dir / "manifest.json";
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << j.dump(2) << '\n';
}

}  // namespace homodens::cli
