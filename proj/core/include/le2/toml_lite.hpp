#pragma once

#include <filesystem>
#include <string>

#include "json.hpp"

namespace le2 {

// Minimal TOML reader covering the subset run configs use: [section] headers,
// key = value with strings, integers, floats, booleans, and single-line
// homogeneous arrays; # comments. Parses into a nlohmann::json object keyed by
// section. Errors carry the line number.
nlohmann::json parse_toml(const std::string& text, const std::string& origin = "<string>");
nlohmann::json parse_toml_file(const std::filesystem::path& path);

}  // namespace le2
