#pragma once

#include <iosfwd>
#include <string>

#include <json.hpp>

#include "lmsexact/state_space.hpp"

namespace lmsexact {

// Shortest decimal form that parses back to the identical double.
std::string format_double(double v);

nlohmann::ordered_json config_to_json(const SystemConfig& cfg);
SystemConfig config_from_json(const nlohmann::ordered_json& j);
SystemConfig load_config_file(const std::string& path);

// Self-describing, deterministic model file: two runs of the same derivation
// produce byte-identical output, so the files are diffable.
nlohmann::ordered_json model_to_json(const StateSpaceModel& m);
StateSpaceModel model_from_json(const nlohmann::ordered_json& j);
void save_model(const StateSpaceModel& m, const std::string& path);
StateSpaceModel load_model(const std::string& path);

} // namespace lmsexact
