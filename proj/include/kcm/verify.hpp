#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace kcm {

enum class CheckStatus { pass, fail, skipped };

std::string to_string(CheckStatus status);

struct CheckResult {
  std::string name;
  CheckStatus status = CheckStatus::pass;
  std::string detail;
  double seconds = 0.0;
};

struct VerifyOptions {
  std::vector<int> m_list{2, 3, 4};
  /// Runs the stationarity check with a rate table that breaks invariance.
  bool corrupt_rates = false;
  int stationarity_width = 8;
  long path_trials = 10000;
  std::uint64_t seed = 1;
};

/// Exact rational identities: gradient condition, antisymmetric decomposition
/// (closed forms at m = 2, reconstruction of the centered current for every m),
/// centering formula up to degree 5, stationarity on windows, degree-one
/// gradient at rho = m/(m+1) and F''(2/3) = -4b at m = 2.
/// Orders above the enumeration caps are reported as skipped.
std::vector<CheckResult> run_exact_identities(const VerifyOptions& options);

/// exact_bad_box_probability <= (1 - rho^m)^floor(l/m) for l <= 20 and
/// rho in {1/4, 1/2, 2/3, 3/4}, with equality at l = m, for m = 2 and m = 3.
std::vector<CheckResult> run_bad_box_checks();

struct PathStatistics {
  long trials = 0;
  long violations = 0;
  long max_bond_usage = 0;
  /// max over trials of length / window_length.
  double fitted_constant = 0.0;
  long bfs_windows = 0;
  long bfs_failures = 0;
  std::string first_violation;
};

/// Random good configurations on rings of 16..64 sites (m given): every
/// path is replayed move by move. Windows of width <= 20 are also checked
/// with the BFS oracle.
PathStatistics run_path_trials(int m, long trials, std::uint64_t seed);

std::vector<CheckResult> run_path_checks(const VerifyOptions& options);

/// Everything above.
std::vector<CheckResult> run_verify(const VerifyOptions& options);

bool all_passed(const std::vector<CheckResult>& results);

}  // namespace kcm
