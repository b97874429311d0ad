#include "sparkmri/scenarios.hpp"

#include <stdexcept>

namespace sparkmri {

const std::vector<Scenario>& all_scenarios() {
  static const std::vector<Scenario> scenarios;
  return scenarios;
}

ScenarioResult run_scenario(const std::string& name) {
  for (const auto& s : all_scenarios())
    if (s.name == name) return s.run();
  throw std::runtime_error("unknown scenario: " + name);
}

}  // namespace sparkmri
