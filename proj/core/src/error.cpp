#include "homodens/error.hpp"

#include <sstream>

namespace homodens {

namespace {

std::string catalog_message(const std::string& name, const std::vector<std::string>& valid) {
  std::ostringstream os;
  os << "unknown potential '" << name << "'; valid names:";
  for (const auto& v : valid) os << ' ' << v;
  return os.str();
}

std::string divergence_message(std::size_t step, const std::vector<double>& last) {
  std::ostringstream os;
  os.precision(17);
  os << "non-finite state at step " << step << "; last finite state (";
  for (std::size_t i = 0; i < last.size(); ++i) os << (i ? ", " : "") << last[i];
  os << ')';
  return os.str();
}

}  // namespace

CatalogError::CatalogError(const std::string& name, std::vector<std::string> valid)
    : ConfigError("potential", catalog_message(name, valid)), valid_(std::move(valid)) {}

DivergenceError::DivergenceError(std::size_t step, std::vector<double> last_finite)
    : Error(divergence_message(step, last_finite)), step_(step), last_(std::move(last_finite)) {}

}  // namespace homodens
