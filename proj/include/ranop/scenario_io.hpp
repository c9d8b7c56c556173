#pragma once

#include <string>

#include "json.hpp"
#include "ranop/env.hpp"

namespace ranop {

// Scenario documents carry powers in dBm; they are converted to watts on
// load. See docs/scenario.md for the field list. Throws ScenarioError.
ScenarioConfig scenario_from_json(const nlohmann::json& doc);
ScenarioConfig load_scenario(const std::string& path);

nlohmann::json scenario_to_json(const ScenarioConfig& scenario);

}  // namespace ranop
