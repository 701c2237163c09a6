#pragma once

#include <stdexcept>
#include <string>

namespace obsel {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed or inconsistent configuration input (bad JSON, unknown fields,
/// dimension mismatches, non-physical parameters).
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(what) {}
};

/// A numerical computation produced non-finite values or could not proceed.
class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what) : Error(what) {}
};

/// A simulation left the finite range; `step_index` is the first bad step.
class DivergedSimulation : public NumericalError {
 public:
  DivergedSimulation(const std::string& what, int step_index)
      : NumericalError(what), step_index(step_index) {}
  int step_index;
};

/// No admissible sensor set exists under the given constraints.
class InfeasibleError : public Error {
 public:
  explicit InfeasibleError(const std::string& what) : Error(what) {}
};

}  // namespace obsel
