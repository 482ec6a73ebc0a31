#pragma once

#include <stdexcept>
#include <string>

namespace safebench {

/// Malformed or inconsistent configuration (CLI exit code 2).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Not enough eligible safe seeds in the requested region (exit code 3).
class InfeasibleScenario : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Covariance factorization failed even after jitter escalation (exit code 4).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Evaluation requested after the oracle stopped accepting queries.
class TerminatedRun : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// A safe GP optimizer has no safe candidate left to evaluate.
class StalledAlgorithm : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace safebench
