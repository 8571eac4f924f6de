// SPDX-License-Identifier: Apache-2.0
#include "vattr/rng.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace vattr {

std::size_t Rng::uniform_index(std::size_t n) {
  if (n == 0) throw std::invalid_argument("uniform_index: n must be positive");
  const std::uint64_t limit = UINT64_MAX / n * n;
  std::uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return static_cast<std::size_t>(x % n);
}

double Rng::normal() {
  // u1 in (0, 1] keeps the log finite.
  const double u1 = 1.0 - uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

std::string Rng::save_state() const {
  std::ostringstream out;
  out << engine_;
  return out.str();
}

void Rng::load_state(const std::string& state) {
  std::istringstream in(state);
  in >> engine_;
  if (in.fail()) throw std::invalid_argument("Rng: malformed engine state");
}

}  // namespace vattr
