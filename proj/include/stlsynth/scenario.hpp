#pragma once

#include <string>

#include "stlsynth/controller.hpp"

namespace stlsynth::ctrl {

// JSON object with the spec text embedded as a string. Unknown keys are
// rejected so a typo cannot silently fall back to a default.
ScenarioConfig scenario_from_json(const std::string& text);
ScenarioConfig load_scenario(const std::string& path);

void write_csv(const std::string& path, const RunReport& report);
std::string report_to_json(const RunReport& report);
void write_report_json(const std::string& path, const RunReport& report);

// Reads back a trace written by write_csv; only t and x columns are used.
stl::Trajectory read_trajectory_csv(const std::string& path);

}  // namespace stlsynth::ctrl
