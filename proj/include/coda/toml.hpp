#pragma once

#include <iosfwd>
#include <string>

#include <json.hpp>

namespace coda {

// Reads the TOML subset used by our config and cohort-spec files into a JSON
// tree: tables ([a.b]), arrays of tables ([[x]]), bare keys, basic strings,
// integers, floats, booleans and single-line scalar arrays. Dates are written
// as quoted strings. Throws ParseError with the offending line number.
nlohmann::json parse_toml(std::istream& in);
nlohmann::json parse_toml_string(const std::string& text);
nlohmann::json parse_toml_file(const std::string& path);

}  // namespace coda
