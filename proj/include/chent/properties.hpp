#pragma once

// Randomized checks of the inequalities the measures must satisfy. Each
// property compares optimizer results with a one-sided slack, and the side
// that must come out larger is warm-started from the other side's witness.

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace chent {

struct PropertyOutcome {
  std::string name;
  bool passed = true;
  /// min over trials of (allowed - observed); negative means violated.
  double worst_margin = 0.0;
  std::size_t trials = 0;
  std::string detail;
};

struct SuiteConfig {
  std::size_t trials = 20;
  std::uint64_t seed = 0;
  /// Adds the expensive restricted-additivity check of the free distance.
  bool nightly = false;
  /// Test hook: report concurrence-based values with flipped sign.
  bool fault_sign_flip = false;
};

/// Suites: "sc", "rr", "rc", "rkme" or "all". Throws BadParam for others.
std::vector<PropertyOutcome> run_suite(std::string_view suite, const SuiteConfig& cfg);

bool all_passed(const std::vector<PropertyOutcome>& outcomes);

}  // namespace chent
