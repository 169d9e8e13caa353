#ifndef ESSAYMARK_JSON_SCHEMA_HPP
#define ESSAYMARK_JSON_SCHEMA_HPP

#include <string>
#include <vector>

#include <json.hpp>

namespace essaymark::json_schema {

// Structural validator for the subset of JSON Schema our report schemas use:
// type, properties, required, items, enum, additionalProperties (boolean),
// minimum/maximum. Returns a list of violations, empty on success.
std::vector<std::string> validate(const nlohmann::json& instance,
                                  const nlohmann::json& schema);

bool is_valid(const nlohmann::json& instance, const nlohmann::json& schema);

}  // namespace essaymark::json_schema

#endif
