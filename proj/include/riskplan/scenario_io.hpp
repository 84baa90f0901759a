#pragma once

#include <filesystem>
#include <string>

#include "riskplan/scenario.hpp"

namespace riskplan {

// Loads and validates a scenario file; agent scripts are resampled onto the
// 0.1 s simulation tick. Throws ParseError for malformed JSON and
// ValidationError (naming the field) for invariant violations.
Scenario LoadScenario(const std::filesystem::path& file);
Scenario ParseScenario(const std::string& json_text);

std::string SerializeScenario(const Scenario& scenario);
void SaveScenario(const Scenario& scenario, const std::filesystem::path& file);

bool ScenariosEqual(const Scenario& a, const Scenario& b);

}  // namespace riskplan
