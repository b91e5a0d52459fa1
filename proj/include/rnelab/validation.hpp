#pragma once

#include <functional>
#include <string>
#include <vector>

#include "rnelab/config.hpp"

namespace rnelab::validation {

struct CheckResult {
  std::string module;
  std::string name;
  bool passed = false;
  std::string detail;
};

struct SuiteReport {
  std::vector<CheckResult> checks;

  bool all_passed() const;
  std::size_t failures() const;
};

/// Runs the property suite at the configuration's parameters (market-scale
/// checks use its asset count, seed and thread budget). `progress`, when
/// set, is called after each check.
SuiteReport run_invariant_suite(const config::RunConfig& cfg,
                                const std::function<void(const CheckResult&)>& progress = {});

}  // namespace rnelab::validation
