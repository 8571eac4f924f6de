// SPDX-License-Identifier: Apache-2.0
#include "vattr/vocab.hpp"

#include <cctype>
#include <fstream>

#include "vattr/common.hpp"

namespace vattr {

std::string ascii_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return out;
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

DescriptorVocab DescriptorVocab::builtin_default() {
  return from_names({"Bright", "Thin", "Coarse", "Slim", "Low", "Pure",
                     "Rich", "Magnetic", "Muddy", "Hoarse", "Round", "Flat",
                     "Shrill", "Shriveled", "Muffled", "Soft", "Transparent",
                     "Husky"});
}

DescriptorVocab DescriptorVocab::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("vocabulary file not readable: " + path.string());
  std::vector<std::string> names;
  std::string line;
  while (std::getline(in, line)) {
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    names.push_back(t);
  }
  return from_names(std::move(names));
}

DescriptorVocab DescriptorVocab::from_names(std::vector<std::string> names) {
  if (names.empty()) throw DataError("vocabulary is empty");
  DescriptorVocab v;
  for (std::size_t i = 0; i < names.size(); ++i) {
    const std::string folded = ascii_lower(names[i]);
    if (folded == ascii_lower(kSimilarLabel)) {
      throw DataError("\"Similar\" is a reserved label, not a descriptor");
    }
    const auto [it, inserted] = v.by_folded_.emplace(folded, i);
    if (!inserted) {
      throw DataError("duplicate descriptor (case-insensitive): " + names[i]);
    }
  }
  v.names_ = std::move(names);
  return v;
}

const std::string& DescriptorVocab::name(int id) const {
  if (id < 0 || id >= size()) {
    throw std::invalid_argument("descriptor id out of range: " +
                                std::to_string(id));
  }
  return names_[static_cast<std::size_t>(id)];
}

std::optional<int> DescriptorVocab::id_of(std::string_view name) const {
  const auto it = by_folded_.find(ascii_lower(name));
  if (it == by_folded_.end()) return std::nullopt;
  return it->second;
}

}  // namespace vattr
