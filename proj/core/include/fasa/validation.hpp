#pragma once

#include <span>
#include <string>
#include <vector>

namespace fasa::validation {

struct Check {
  std::string name;
  bool passed = false;
  std::string detail;  ///< worst observed deviation or the first violation
};

/// Numerical checks of the drift design and the streak chain, plus a short
/// closed-loop conservation run. Deterministic; takes well under a second.
std::vector<Check> run_validation();

bool all_passed(std::span<const Check> checks) noexcept;

}  // namespace fasa::validation
