// SPDX-License-Identifier: Apache-2.0
#include "vattr/toml.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

#include "vattr/common.hpp"

namespace vattr::toml {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// Strips a trailing comment that is not inside a string literal.
std::string strip_comment(const std::string& line) {
  bool in_string = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"' && (i == 0 || line[i - 1] != '\\')) {
      in_string = !in_string;
    } else if (line[i] == '#' && !in_string) {
      return line.substr(0, i);
    }
  }
  return line;
}

[[noreturn]] void fail(const std::string& source, std::size_t lineno,
                       const std::string& msg) {
  throw DataError(source + ":" + std::to_string(lineno) + ": " + msg);
}

Value parse_scalar(const std::string& raw, const std::string& source,
                   std::size_t lineno) {
  Value v;
  const std::string text = trim(raw);
  if (text.empty()) fail(source, lineno, "empty value");

  if (text.front() == '"') {
    if (text.size() < 2 || text.back() != '"') {
      fail(source, lineno, "unterminated string");
    }
    v.kind = Value::Kind::kString;
    std::string out;
    for (std::size_t i = 1; i + 1 < text.size(); ++i) {
      if (text[i] == '\\' && i + 2 < text.size()) {
        ++i;
        switch (text[i]) {
          case 'n': out += '\n'; break;
          case 't': out += '\t'; break;
          case '"': out += '"'; break;
          case '\\': out += '\\'; break;
          default: out += text[i];
        }
      } else {
        out += text[i];
      }
    }
    v.str = out;
    return v;
  }
  if (text == "true" || text == "false") {
    v.kind = Value::Kind::kBoolean;
    v.boolean = text == "true";
    return v;
  }

  // number: integer unless it has a fraction/exponent
  const bool looks_float = text.find_first_of(".eE") != std::string::npos &&
                           text.find("0x") != 0;
  std::istringstream in(text);
  if (looks_float) {
    v.kind = Value::Kind::kFloat;
    in >> v.number;
  } else {
    v.kind = Value::Kind::kInteger;
    in >> v.integer;
    v.number = static_cast<double>(v.integer);
  }
  char c;
  if (in.fail() || (in >> c)) {
    fail(source, lineno, "cannot parse value: " + text);
  }
  return v;
}

Value parse_value(const std::string& raw, const std::string& source,
                  std::size_t lineno) {
  const std::string text = trim(raw);
  if (!text.empty() && text.front() == '[') {
    if (text.back() != ']') fail(source, lineno, "unterminated array");
    Value v;
    v.kind = Value::Kind::kArray;
    std::string body = text.substr(1, text.size() - 2);
    std::string item;
    bool in_string = false;
    for (char c : body) {
      if (c == '"') in_string = !in_string;
      if (c == ',' && !in_string) {
        if (!trim(item).empty()) {
          v.array.push_back(parse_scalar(item, source, lineno));
        }
        item.clear();
      } else {
        item += c;
      }
    }
    if (!trim(item).empty()) {
      v.array.push_back(parse_scalar(item, source, lineno));
    }
    return v;
  }
  return parse_scalar(text, source, lineno);
}

}  // namespace

double Value::as_number() const {
  if (kind == Kind::kInteger) return static_cast<double>(integer);
  if (kind == Kind::kFloat) return number;
  throw DataError("config value is not a number");
}

const Value* Table::find(const std::string& key) const {
  const auto it = values_.find(key);
  return it == values_.end() ? nullptr : &it->second;
}

std::optional<std::string> Table::get_string(const std::string& key) const {
  const Value* v = find(key);
  if (!v) return std::nullopt;
  if (v->kind != Value::Kind::kString) {
    throw DataError("config key " + key + " is not a string");
  }
  return v->str;
}

std::optional<std::int64_t> Table::get_integer(const std::string& key) const {
  const Value* v = find(key);
  if (!v) return std::nullopt;
  if (v->kind != Value::Kind::kInteger) {
    throw DataError("config key " + key + " is not an integer");
  }
  return v->integer;
}

std::optional<double> Table::get_number(const std::string& key) const {
  const Value* v = find(key);
  if (!v) return std::nullopt;
  return v->as_number();
}

std::optional<bool> Table::get_boolean(const std::string& key) const {
  const Value* v = find(key);
  if (!v) return std::nullopt;
  if (v->kind != Value::Kind::kBoolean) {
    throw DataError("config key " + key + " is not a boolean");
  }
  return v->boolean;
}

std::optional<std::vector<double>> Table::get_number_array(
    const std::string& key) const {
  const Value* v = find(key);
  if (!v) return std::nullopt;
  if (v->kind != Value::Kind::kArray) {
    throw DataError("config key " + key + " is not an array");
  }
  std::vector<double> out;
  out.reserve(v->array.size());
  for (const Value& item : v->array) out.push_back(item.as_number());
  return out;
}

Table parse(const std::string& text, const std::string& source) {
  Table table;
  std::istringstream in(text);
  std::string line;
  std::string section;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string stripped = trim(strip_comment(line));
    if (stripped.empty()) continue;
    if (stripped.front() == '[') {
      if (stripped.back() != ']') fail(source, lineno, "malformed section");
      section = trim(stripped.substr(1, stripped.size() - 2));
      if (section.empty()) fail(source, lineno, "empty section name");
      continue;
    }
    const auto eq = stripped.find('=');
    if (eq == std::string::npos) fail(source, lineno, "expected key = value");
    const std::string key = trim(stripped.substr(0, eq));
    if (key.empty()) fail(source, lineno, "empty key");
    const std::string full = section.empty() ? key : section + "." + key;
    if (table.contains(full)) fail(source, lineno, "duplicate key " + full);
    table.values()[full] =
        parse_value(stripped.substr(eq + 1), source, lineno);
  }
  return table;
}

Table parse_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("config file not readable: " + path.string());
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return parse(text, path.string());
}

}  // namespace vattr::toml
