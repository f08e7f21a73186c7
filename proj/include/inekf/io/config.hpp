#pragma once

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "inekf/errors.hpp"
#include "inekf/lie/so3.hpp"

namespace inekf::io {

/// Flat `key = value` configuration with `[section]` headers; section names
/// prefix the keys as "section.key". `#` starts a comment. Values are plain
/// strings until queried.
class Config {
 public:
  static Config Load(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
      throw ConfigError("cannot open config " + path);
    }
    Config cfg;
    std::string line, section;
    int line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      const std::string trimmed = trim(line);
      if (trimmed.empty()) continue;
      if (trimmed.front() == '[') {
        if (trimmed.back() != ']') {
          throw ConfigError(path + ":" + std::to_string(line_no) + ": unterminated section");
        }
        section = trim(trimmed.substr(1, trimmed.size() - 2));
        continue;
      }
      const auto eq = trimmed.find('=');
      if (eq == std::string::npos) {
        throw ConfigError(path + ":" + std::to_string(line_no) + ": expected key = value");
      }
      const std::string key = trim(trimmed.substr(0, eq));
      const std::string value = trim(trimmed.substr(eq + 1));
      if (key.empty()) {
        throw ConfigError(path + ":" + std::to_string(line_no) + ": empty key");
      }
      cfg.values_[section.empty() ? key : section + "." + key] = value;
    }
    return cfg;
  }

  static Config FromString(const std::string& text) {
    const std::string tmp = "/tmp/.inekf_config_from_string";
    std::ofstream(tmp) << text;
    return Load(tmp);
  }

  bool has(const std::string& key) const { return values_.count(key) > 0; }

  std::string get_string(const std::string& key, const std::string& fallback) const {
    const auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
  }

  std::string require_string(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) {
      throw ConfigError("missing required config key '" + key + "'");
    }
    return it->second;
  }

  double get_double(const std::string& key, double fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    return parse_double(key, it->second);
  }

  int get_int(const std::string& key, int fallback) const {
    return static_cast<int>(get_double(key, fallback));
  }

  bool get_bool(const std::string& key, bool fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    std::string v = it->second;
    std::transform(v.begin(), v.end(), v.begin(), ::tolower);
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ConfigError("config key '" + key + "' is not a boolean: " + it->second);
  }

  Vec3 get_vec3(const std::string& key, const Vec3& fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    std::string v = it->second;
    std::replace(v.begin(), v.end(), ',', ' ');
    std::istringstream ss(v);
    Vec3 out;
    if (!(ss >> out.x() >> out.y() >> out.z())) {
      throw ConfigError("config key '" + key + "' is not a 3-vector: " + it->second);
    }
    return out;
  }

 private:
  static std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
  }

  double parse_double(const std::string& key, const std::string& value) const {
    try {
      size_t used = 0;
      const double out = std::stod(value, &used);
      if (used != value.size()) throw std::invalid_argument(value);
      return out;
    } catch (const std::exception&) {
      throw ConfigError("config key '" + key + "' is not a number: " + value);
    }
  }

  std::map<std::string, std::string> values_;
};

}  // namespace inekf::io
