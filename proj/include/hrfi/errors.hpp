#pragma once

#include <stdexcept>
#include <string>

namespace hrfi {

// Input outside the model's domain (non-positive force, beta >= 0, ...).
class DomainError : public std::invalid_argument {
 public:
  explicit DomainError(const std::string& what) : std::invalid_argument(what) {}
};

// The data cannot support the requested analysis (zero variance, a single
// stimulus level, a boundary-converged fit).
class DegenerateError : public std::runtime_error {
 public:
  explicit DegenerateError(const std::string& what)
      : std::runtime_error(what) {}
};

// A simulation left the finite range.
class DivergenceError : public std::runtime_error {
 public:
  explicit DivergenceError(const std::string& what)
      : std::runtime_error(what) {}
};

// Malformed input file or configuration.
class SchemaError : public std::runtime_error {
 public:
  explicit SchemaError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace hrfi
