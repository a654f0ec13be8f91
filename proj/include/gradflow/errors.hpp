#pragma once

#include <stdexcept>
#include <string>

namespace gradflow {

/// Structurally invalid input: bad indices, dimension mismatches, disconnected
/// graphs, malformed scenario files. Maps to CLI exit code 1.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

/// A trajectory left the representable range. Maps to CLI exit code 2.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(const std::string& what, double time, double norm)
      : std::runtime_error(what), time(time), norm(norm) {}

  double time = 0.0;
  double norm = 0.0;
};

}  // namespace gradflow
