#include "essaymark/json_schema.hpp"

namespace essaymark::json_schema {

namespace {

using nlohmann::json;

bool type_matches(const json& v, const std::string& type) {
  if (type == "object") return v.is_object();
  if (type == "array") return v.is_array();
  if (type == "string") return v.is_string();
  if (type == "number") return v.is_number();
  if (type == "integer") return v.is_number_integer() || v.is_number_unsigned();
  if (type == "boolean") return v.is_boolean();
  if (type == "null") return v.is_null();
  return false;
}

void check(const json& v, const json& schema, const std::string& path,
           std::vector<std::string>& errors) {
  if (schema.contains("type")) {
    const auto& t = schema["type"];
    bool ok = false;
    if (t.is_string()) {
      ok = type_matches(v, t.get<std::string>());
    } else if (t.is_array()) {
      for (const auto& alt : t)
        if (type_matches(v, alt.get<std::string>())) ok = true;
    }
    if (!ok) {
      errors.push_back(path + ": type mismatch (expected " + t.dump() + ")");
      return;
    }
  }
  if (schema.contains("enum")) {
    bool found = false;
    for (const auto& e : schema["enum"])
      if (e == v) found = true;
    if (!found) errors.push_back(path + ": value not in enum");
  }
  if (v.is_number()) {
    if (schema.contains("minimum") &&
        v.get<double>() < schema["minimum"].get<double>())
      errors.push_back(path + ": below minimum");
    if (schema.contains("maximum") &&
        v.get<double>() > schema["maximum"].get<double>())
      errors.push_back(path + ": above maximum");
  }
  if (v.is_object()) {
    if (schema.contains("required")) {
      for (const auto& key : schema["required"])
        if (!v.contains(key.get<std::string>()))
          errors.push_back(path + ": missing required key '" +
                           key.get<std::string>() + "'");
    }
    const json props =
        schema.contains("properties") ? schema["properties"] : json::object();
    for (auto it = v.begin(); it != v.end(); ++it) {
      if (props.contains(it.key())) {
        check(it.value(), props[it.key()], path + "/" + it.key(), errors);
      } else if (schema.contains("additionalProperties") &&
                 schema["additionalProperties"].is_boolean() &&
                 !schema["additionalProperties"].get<bool>()) {
        errors.push_back(path + ": unexpected key '" + it.key() + "'");
      } else if (schema.contains("additionalProperties") &&
                 schema["additionalProperties"].is_object()) {
        check(it.value(), schema["additionalProperties"],
              path + "/" + it.key(), errors);
      }
    }
  }
  if (v.is_array() && schema.contains("items")) {
    for (std::size_t i = 0; i < v.size(); ++i)
      check(v[i], schema["items"], path + "/" + std::to_string(i), errors);
  }
}

}  // namespace

std::vector<std::string> validate(const json& instance, const json& schema) {
  std::vector<std::string> errors;
  check(instance, schema, "#", errors);
  return errors;
}

bool is_valid(const json& instance, const json& schema) {
  return validate(instance, schema).empty();
}

}  // namespace essaymark::json_schema
