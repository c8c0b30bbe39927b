#pragma once

// Minimal TOML reader covering the subset the experiment configs use:
// [section] headers, key = value with strings, integers, floats, booleans,
// and flat arrays of numbers. Comments start with '#'. Keys are addressed as
// "section.key".

#include <cctype>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "nldp/error.hpp"

namespace nldp::toml {

struct Value {
  enum class Type { kString, kNumber, kBoolean, kArray } type = Type::kString;
  std::string string_value;
  double number_value = 0.0;
  bool bool_value = false;
  std::vector<double> array_value;
};

class Table {
 public:
  bool contains(const std::string& key) const { return values_.count(key) > 0; }

  const Value& at(const std::string& key) const {
    auto it = values_.find(key);
    require(it != values_.end(), ErrorKind::kConfig, "missing config key '" + key + "'");
    return it->second;
  }

  std::string get_string(const std::string& key, const std::string& fallback = "") const {
    if (!contains(key)) return fallback;
    const Value& v = at(key);
    require(v.type == Value::Type::kString, ErrorKind::kConfig,
            "config key '" + key + "' must be a string");
    return v.string_value;
  }

  double get_number(const std::string& key, double fallback = 0.0) const {
    if (!contains(key)) return fallback;
    const Value& v = at(key);
    require(v.type == Value::Type::kNumber, ErrorKind::kConfig,
            "config key '" + key + "' must be a number");
    return v.number_value;
  }

  long long get_integer(const std::string& key, long long fallback = 0) const {
    return static_cast<long long>(get_number(key, static_cast<double>(fallback)));
  }

  bool get_bool(const std::string& key, bool fallback = false) const {
    if (!contains(key)) return fallback;
    const Value& v = at(key);
    require(v.type == Value::Type::kBoolean, ErrorKind::kConfig,
            "config key '" + key + "' must be a boolean");
    return v.bool_value;
  }

  std::vector<double> get_array(const std::string& key,
                                const std::vector<double>& fallback = {}) const {
    if (!contains(key)) return fallback;
    const Value& v = at(key);
    require(v.type == Value::Type::kArray, ErrorKind::kConfig,
            "config key '" + key + "' must be an array of numbers");
    return v.array_value;
  }

  void set(const std::string& key, Value v) { values_[key] = std::move(v); }

  const std::map<std::string, Value>& entries() const { return values_; }

 private:
  std::map<std::string, Value> values_;
};

namespace detail {

inline std::string strip_ws(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::string strip_comment(const std::string& line) {
  bool in_string = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') in_string = !in_string;
    if (line[i] == '#' && !in_string) return line.substr(0, i);
  }
  return line;
}

inline Value parse_value(const std::string& raw, std::size_t line_no) {
  std::string s = strip_ws(raw);
  require(!s.empty(), ErrorKind::kConfig,
          "empty value on line " + std::to_string(line_no));
  Value v;
  if (s.front() == '"') {
    require(s.size() >= 2 && s.back() == '"', ErrorKind::kConfig,
            "unterminated string on line " + std::to_string(line_no));
    v.type = Value::Type::kString;
    v.string_value = s.substr(1, s.size() - 2);
    return v;
  }
  if (s == "true" || s == "false") {
    v.type = Value::Type::kBoolean;
    v.bool_value = (s == "true");
    return v;
  }
  if (s.front() == '[') {
    require(s.back() == ']', ErrorKind::kConfig,
            "unterminated array on line " + std::to_string(line_no));
    v.type = Value::Type::kArray;
    std::string inner = s.substr(1, s.size() - 2);
    std::stringstream ss(inner);
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = strip_ws(item);
      if (item.empty()) continue;
      try {
        v.array_value.push_back(std::stod(item));
      } catch (const std::exception&) {
        fail(ErrorKind::kConfig, "bad array element '" + item + "' on line " +
                                     std::to_string(line_no));
      }
    }
    return v;
  }
  try {
    std::size_t consumed = 0;
    v.number_value = std::stod(s, &consumed);
    require(consumed == s.size(), ErrorKind::kConfig,
            "bad number '" + s + "' on line " + std::to_string(line_no));
    v.type = Value::Type::kNumber;
    return v;
  } catch (const Error&) {
    throw;
  } catch (const std::exception&) {
    fail(ErrorKind::kConfig, "cannot parse value '" + s + "' on line " +
                                 std::to_string(line_no));
  }
}

}  // namespace detail

inline Table parse(const std::string& text) {
  Table table;
  std::istringstream in(text);
  std::string line;
  std::string section;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = detail::strip_ws(detail::strip_comment(line));
    if (line.empty()) continue;
    if (line.front() == '[') {
      require(line.back() == ']', ErrorKind::kConfig,
              "unterminated section header on line " + std::to_string(line_no));
      section = detail::strip_ws(line.substr(1, line.size() - 2));
      require(!section.empty(), ErrorKind::kConfig,
              "empty section name on line " + std::to_string(line_no));
      continue;
    }
    std::size_t eq = line.find('=');
    require(eq != std::string::npos, ErrorKind::kConfig,
            "expected key = value on line " + std::to_string(line_no));
    std::string key = detail::strip_ws(line.substr(0, eq));
    require(!key.empty(), ErrorKind::kConfig, "empty key on line " + std::to_string(line_no));
    std::string full_key = section.empty() ? key : section + "." + key;
    table.set(full_key, detail::parse_value(line.substr(eq + 1), line_no));
  }
  return table;
}

inline Table parse_file(const std::string& path) {
  std::ifstream f(path);
  require(f.good(), ErrorKind::kConfig, "cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse(ss.str());
}

}  // namespace nldp::toml
