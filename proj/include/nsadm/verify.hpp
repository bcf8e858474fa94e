/// @file
/// @brief Self-check suite: oracle equivalences and structural invariants,
///        grouped so a subset can be run from the command line.
#pragma once

#include <string>
#include <vector>

namespace nsadm {

struct CheckResult {
  std::string group;
  std::string name;
  /// Worst observed error or violation count.
  double value{0};
  /// Effective tolerance; a check passes iff value < tol.
  double tol{0};
  bool pass{false};
};

struct VerifyOptions {
  /// Empty runs every group.
  std::vector<std::string> groups;
  /// Multiplies every tolerance; 0 forces failures (harness self-test).
  double tol_scale{1.0};
  unsigned seed{20240601};
};

std::vector<std::string> verify_groups();

/// Throws ConfigError for an unknown group name.
std::vector<CheckResult> run_verification(const VerifyOptions &opt);

} // namespace nsadm
