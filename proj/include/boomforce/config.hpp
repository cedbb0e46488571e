#pragma once

// JSON scenario configuration. Documents mirror ScenarioConfig section by
// section; anything omitted keeps its default and unknown keys are rejected.
// Overrides use dotted key paths ("spec.omega_n=5") and are applied to the
// document before it is decoded, so an override producing an invalid config
// fails exactly like a bad file.

#include <filesystem>
#include <span>
#include <string>
#include <string_view>

#include <json.hpp>

#include "boomforce/harness.hpp"

namespace boomforce {

nlohmann::json to_json(const ScenarioConfig& config);

/// Strict decode on top of the defaults. Raises kConfig naming the key path.
ScenarioConfig config_from_json(const nlohmann::json& doc);

/// Parses JSON text; syntax errors raise kConfig with line and column.
nlohmann::json parse_json_text(const std::string& text, const std::string& source);

/// Applies "dotted.key=value". The value is read as JSON when it parses
/// (numbers, booleans, null, arrays), otherwise as a string.
void apply_override(nlohmann::json& doc, std::string_view assignment);

ScenarioConfig load_config(const std::filesystem::path& path,
                           std::span<const std::string> overrides = {});

ScenarioConfig config_with_overrides(const nlohmann::json& doc,
                                     std::span<const std::string> overrides);

}  // namespace boomforce
