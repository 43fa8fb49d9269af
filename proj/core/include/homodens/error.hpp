#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace homodens {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid user input or configuration. `field` names the offending key.
class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& what)
      : Error(what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

class CatalogError : public ConfigError {
 public:
  CatalogError(const std::string& name, std::vector<std::string> valid);
  const std::vector<std::string>& valid_names() const noexcept { return valid_; }

 private:
  std::vector<std::string> valid_;
};

// Quadrature or other numerical procedure failed to reach its tolerance.
class NumericalError : public Error {
 public:
  NumericalError(const std::string& what, double best_value, double achieved_tol)
      : Error(what), best_value_(best_value), achieved_tol_(achieved_tol) {}
  double best_value() const noexcept { return best_value_; }
  double achieved_tol() const noexcept { return achieved_tol_; }

 private:
  double best_value_;
  double achieved_tol_;
};

// Non-finite state during time stepping.
class DivergenceError : public Error {
 public:
  DivergenceError(std::size_t step, std::vector<double> last_finite);
  std::size_t step() const noexcept { return step_; }
  const std::vector<double>& last_finite_state() const noexcept { return last_; }

 private:
  std::size_t step_;
  std::vector<double> last_;
};

class RangeError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class EmptyStreamError : public Error {
 public:
  using Error::Error;
};

}  // namespace homodens
