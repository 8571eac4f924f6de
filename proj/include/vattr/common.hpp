// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace vattr {

// Speaker, descriptor and edited-voice vectors all live in one shared
// D-dimensional space.
using Embedding = std::vector<double>;

enum class Gender { F, M };

inline char gender_char(Gender g) { return g == Gender::F ? 'F' : 'M'; }

// Bad input files, unknown names, mismatched shapes.
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

// Non-finite values, degenerate norms, failed certifications.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace vattr
