#pragma once

#include <string>
#include <vector>

namespace geoavg {

/// One line of a verification suite: a named check with its residual or
/// margin and the threshold it was held to.
struct CheckResult {
  std::string name;
  bool passed = false;
  double value = 0.0;      // residual, margin, or statistic
  double threshold = 0.0;  // what it was compared against
  std::string detail;
};

struct SuiteResult {
  std::string name;
  std::vector<CheckResult> checks;

  bool passed() const;
};

/// Named verification suites with fixed default grids (shipped constants, so
/// runs are deterministic): prop1, prop2, prop3, lemma1, parallel, additive.
SuiteResult run_suite(const std::string& name);

std::vector<std::string> suite_names();

}  // namespace geoavg
