// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <random>
#include <string>

namespace vattr {

// Seeded generator with fixed derivations so that a saved engine state
// resumes the exact draw sequence. Checkpoints record kAlgorithm next to the
// state; determinism is guaranteed within one build of this library, not
// across unrelated implementations.
//
// uniform():      53-bit mantissa draw in [0, 1)
// uniform_index:  rejection sampling, no modulo bias
// normal():       Box-Muller, two fresh uniforms per call, no cached spare
class Rng {
 public:
  static constexpr const char* kAlgorithm = "mt19937_64/canonical53/boxmuller2";

  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  std::size_t uniform_index(std::size_t n);

  double normal();

  std::string save_state() const;
  void load_state(const std::string& state);

 private:
  std::mt19937_64 engine_;
};

}  // namespace vattr
