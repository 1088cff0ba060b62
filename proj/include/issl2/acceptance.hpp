#pragma once

// The nine acceptance criteria as runnable checks. Each check recomputes its
// reference values from closed forms or direct inequality evaluation.

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace issl2 {

struct CriterionResult {
  int id = 0;
  std::string title;
  bool pass = false;
  /// Measured values and the pinned tolerances they were compared against.
  std::string detail;
  double seconds = 0.0;
};

struct AcceptanceOptions {
  std::size_t threads = 0;  // Monte Carlo workers; 0 = hardware concurrency
  std::uint64_t seed = 20240101;
};

CriterionResult acceptance_criterion(int id, const AcceptanceOptions& opts = {});
std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opts = {});

/// "[PASS] 3 <title> | <detail> (1.23 s)"
std::string format_criterion(const CriterionResult& r);

}  // namespace issl2
