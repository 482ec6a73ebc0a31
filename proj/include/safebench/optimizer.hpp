#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "safebench/safeop.hpp"

namespace safebench {

/// Per-evaluation bookkeeping an optimizer reports alongside each query.
struct StepDiagnostics {
  std::size_t safe_set_size = 0;
  std::size_t maximizers = 0;
  std::size_t expanders = 0;
  bool fallback = false;        // safe GP: M and G both empty, picked from S
  bool forced_accept = false;   // VA: retry cap reached
  std::size_t rejected = 0;     // VA: candidates discarded before this one
};

/// Step-wise optimizer driven by the harness. Only noisy measurements reach
/// implementations; the true objective stays with the oracle.
class Optimizer {
 public:
  virtual ~Optimizer() = default;

  virtual std::string name() const = 0;

  /// Called once with the evaluated initial safe seeds.
  virtual void initialize(std::span<const Measurement> seeds) = 0;

  /// Performs at least one evaluation unless the black box stops. Returns
  /// one diagnostics entry per evaluation made, in order.
  virtual std::vector<StepDiagnostics> step(BlackBox& box) = 0;
};

}  // namespace safebench
