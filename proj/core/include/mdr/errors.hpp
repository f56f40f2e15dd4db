#pragma once

#include <stdexcept>
#include <string>

namespace mdr {

// Base class so callers can catch everything thrown by this library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Channel parameters violate an invariant (non-PSD correlation, bad variance, ...).
class InvalidParams : public Error {
 public:
  explicit InvalidParams(const std::string& what) : Error(what) {}
};

// Conditioning covariance is singular beyond tolerance; the caller should
// switch to limit-form parameters (absent variables) instead.
class DegenerateConditioning : public Error {
 public:
  explicit DegenerateConditioning(const std::string& what) : Error(what) {}
};

// An optimizer or grid search found no point satisfying the constraints.
class NoFeasiblePoint : public Error {
 public:
  explicit NoFeasiblePoint(const std::string& what) : Error(what) {}
};

// Simulator configuration cannot be realized (layer rate below one bit, ...).
class ConfigInfeasible : public Error {
 public:
  explicit ConfigInfeasible(const std::string& what) : Error(what) {}
};

// Repair parity budget cannot cover the configured streams. Raised at
// configuration time, never during a run.
class RepairInfeasible : public ConfigInfeasible {
 public:
  explicit RepairInfeasible(const std::string& what) : ConfigInfeasible(what) {}
};

}  // namespace mdr
