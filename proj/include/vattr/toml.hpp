// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace vattr::toml {

// The slice of TOML the run configs use: [section] headers, string / integer
// / float / boolean values, homogeneous arrays of numbers or strings, '#'
// comments. Keys are flattened to "section.key".
struct Value {
  enum class Kind { kString, kInteger, kFloat, kBoolean, kArray };
  Kind kind = Kind::kString;
  std::string str;
  std::int64_t integer = 0;
  double number = 0;
  bool boolean = false;
  std::vector<Value> array;

  double as_number() const;  // integer or float
};

class Table {
 public:
  bool contains(const std::string& key) const { return values_.count(key) > 0; }
  const Value* find(const std::string& key) const;

  std::optional<std::string> get_string(const std::string& key) const;
  std::optional<std::int64_t> get_integer(const std::string& key) const;
  std::optional<double> get_number(const std::string& key) const;
  std::optional<bool> get_boolean(const std::string& key) const;
  std::optional<std::vector<double>> get_number_array(
      const std::string& key) const;

  std::map<std::string, Value>& values() { return values_; }
  const std::map<std::string, Value>& values() const { return values_; }

 private:
  std::map<std::string, Value> values_;
};

Table parse(const std::string& text, const std::string& source_name);
Table parse_file(const std::filesystem::path& path);

}  // namespace vattr::toml
