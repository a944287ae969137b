#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sfwm {

// Argument outside a model's validity window (wavelength range, stencil, curve support).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// The fundamental mode equation has no bound root.
class ModeCutoffError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Iterative solver failed; carries the last residual.
class NumericError : public std::runtime_error {
 public:
  NumericError(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

class PhaseMatchError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Requested grid cannot resolve the phase or pump oscillations.
class GridResolutionError : public std::runtime_error {
 public:
  GridResolutionError(const std::string& what, std::size_t required_ns,
                      std::size_t required_ni)
      : std::runtime_error(what), required_ns_(required_ns), required_ni_(required_ni) {}
  std::size_t required_ns() const { return required_ns_; }
  std::size_t required_ni() const { return required_ni_; }

 private:
  std::size_t required_ns_;
  std::size_t required_ni_;
};

class CorrelationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class PlanError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Schema violation in a run configuration. `field` is a JSON-pointer-like path.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& field, const std::string& what)
      : std::runtime_error(field + ": " + what), field_(field) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

}  // namespace sfwm
