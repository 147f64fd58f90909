#pragma once

#include <functional>
#include <string>
#include <vector>

namespace whf {

/// Quick runs smaller ensembles and fewer random cases; Full uses the
/// acceptance parameters.
enum class Profile { Quick, Full };

struct CheckResult {
  std::string id;
  std::string title;
  bool passed = false;
  /// Measured quantities and the thresholds they were compared against.
  std::string detail;
  double seconds = 0.0;
};

struct Check {
  std::string id;
  std::string title;
  std::function<CheckResult(Profile)> run;
};

/// Numbered acceptance checks 1-11 followed by module invariants (M*).
const std::vector<Check>& checks();

/// Runs every check whose id is in `only` (all if empty), in order. Errors
/// thrown by a check are reported as a failure of that check.
std::vector<CheckResult> run_checks(Profile profile, const std::vector<std::string>& only = {},
                                    const std::function<void(const CheckResult&)>& on_result = {});

/// `PASS [id] title: detail` without timing, so repeated runs print the same.
std::string format_result(const CheckResult& r);

/// Least-squares slope of log(y) against log(x).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace whf
