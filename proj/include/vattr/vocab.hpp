// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace vattr {

// Ordered descriptor vocabulary. Ids are contiguous 0..V-1 in declaration
// order; lookups are case-insensitive. The reserved annotation label
// "Similar" can never be a member.
class DescriptorVocab {
 public:
  static constexpr const char* kSimilarLabel = "Similar";

  // The 18 stock voice-attribute descriptors.
  static DescriptorVocab builtin_default();

  // One descriptor per line; '#' comments and blank lines are skipped.
  static DescriptorVocab load(const std::filesystem::path& path);

  static DescriptorVocab from_names(std::vector<std::string> names);

  int size() const { return static_cast<int>(names_.size()); }
  const std::string& name(int id) const;
  const std::vector<std::string>& names() const { return names_; }
  std::optional<int> id_of(std::string_view name) const;

  bool operator==(const DescriptorVocab&) const = default;

 private:
  std::vector<std::string> names_;
  std::map<std::string, int> by_folded_;
};

// Lowercase ASCII fold used for all descriptor comparisons.
std::string ascii_lower(std::string_view s);

}  // namespace vattr
