#pragma once

// Validator for the subset of JSON Schema used under schemas/: type, const,
// enum, pattern, minimum/maximum, required, properties,
// additionalProperties, items and local $ref.

#include <fstream>
#include <regex>
#include <string>
#include <vector>

#include <json.hpp>

namespace wastedata::testing {

class SchemaChecker {
 public:
  explicit SchemaChecker(nlohmann::json schema) : root_(std::move(schema)) {}

  static SchemaChecker load(const std::string& name) {
    std::ifstream in(std::string(WASTEDATA_SCHEMA_DIR) + "/" + name);
    if (!in) throw std::runtime_error("missing schema " + name);
    return SchemaChecker(nlohmann::json::parse(in));
  }

  // Empty when valid.
  std::vector<std::string> errors(const nlohmann::json& doc) const {
    std::vector<std::string> out;
    check(root_, doc, "$", out);
    return out;
  }

 private:
  const nlohmann::json& resolve(const nlohmann::json& s) const {
    if (!s.is_object() || !s.contains("$ref")) return s;
    std::string ref = s["$ref"];
    if (ref.rfind("#/", 0) != 0) throw std::runtime_error("unsupported $ref " + ref);
    return root_.at(nlohmann::json::json_pointer(ref.substr(1)));
  }

  static bool has_type(const nlohmann::json& v, const std::string& t) {
    if (t == "object") return v.is_object();
    if (t == "array") return v.is_array();
    if (t == "string") return v.is_string();
    if (t == "boolean") return v.is_boolean();
    if (t == "null") return v.is_null();
    if (t == "integer") return v.is_number_integer();
    if (t == "number") return v.is_number();
    return false;
  }

  void check(const nlohmann::json& raw, const nlohmann::json& v, const std::string& at,
             std::vector<std::string>& out) const {
    if (raw.is_boolean()) {
      if (!raw.get<bool>()) out.push_back(at + ": not allowed");
      return;
    }
    const auto& s = resolve(raw);
    if (s.contains("type")) {
      bool ok = false;
      if (s["type"].is_array()) {
        for (const auto& t : s["type"]) ok = ok || has_type(v, t);
      } else {
        ok = has_type(v, s["type"]);
      }
      if (!ok) {
        out.push_back(at + ": expected " + s["type"].dump());
        return;
      }
    }
    if (s.contains("const") && v != s["const"]) out.push_back(at + ": expected " + s["const"].dump());
    if (s.contains("enum")) {
      bool found = false;
      for (const auto& e : s["enum"]) found = found || e == v;
      if (!found) out.push_back(at + ": " + v.dump() + " not in enum");
    }
    if (s.contains("pattern") && v.is_string() &&
        !std::regex_search(v.get<std::string>(), std::regex(s["pattern"].get<std::string>())))
      out.push_back(at + ": does not match pattern");
    if (v.is_number()) {
      if (s.contains("minimum") && v.get<double>() < s["minimum"].get<double>()) out.push_back(at + ": below minimum");
      if (s.contains("maximum") && v.get<double>() > s["maximum"].get<double>()) out.push_back(at + ": above maximum");
    }
    if (v.is_object()) {
      if (s.contains("required"))
        for (const auto& k : s["required"])
          if (!v.contains(k.get<std::string>())) out.push_back(at + ": missing " + k.get<std::string>());
      for (const auto& [k, child] : v.items()) {
        if (s.contains("properties") && s["properties"].contains(k)) {
          check(s["properties"][k], child, at + "." + k, out);
        } else if (s.contains("additionalProperties")) {
          check(s["additionalProperties"], child, at + "." + k, out);
        }
      }
    }
    if (v.is_array() && s.contains("items"))
      for (std::size_t i = 0; i < v.size(); ++i) check(s["items"], v[i], at + "[" + std::to_string(i) + "]", out);
  }

  nlohmann::json root_;
};

}  // namespace wastedata::testing
