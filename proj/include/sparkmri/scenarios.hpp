#pragma once

#include <functional>
#include <string>
#include <vector>

namespace sparkmri {

/// One pass/fail check of an end-to-end scenario.
struct CheckResult {
  std::string label;
  bool passed = false;
  std::string detail;
};

struct ScenarioResult {
  std::string name;
  std::vector<CheckResult> checks;
  std::uint64_t digest = 0;  // FNV-1a over the scenario's outputs
  double seconds = 0.0;

  bool passed() const {
    for (const auto& c : checks)
      if (!c.passed) return false;
    return true;
  }
};

struct Scenario {
  std::string name;
  std::string description;
  std::function<ScenarioResult()> run;
};

/// The named end-to-end scenarios backing `repro` and the acceptance suite.
const std::vector<Scenario>& all_scenarios();
ScenarioResult run_scenario(const std::string& name);

}  // namespace sparkmri
