#pragma once

#include <stdexcept>
#include <string>

namespace stokeslab {

/// Invalid input or configuration detected before any numerical work.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Geometry the discretization does not support (e.g. a non axis-aligned Γ2 side for H).
class GeometryError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

/// Singular or inaccurate linear algebra, eigensolver failure.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace stokeslab
