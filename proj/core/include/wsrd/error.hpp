#pragma once

#include <stdexcept>
#include <string>

namespace wsrd {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed or unreadable input data (files, configs).
class DataError : public Error {
 public:
  using Error::Error;
};

/// Numerical failure (ill-conditioned systems, non-convergence).
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace wsrd
