// SPDX-License-Identifier: Apache-2.0
#include "vattr/losses.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace vattr {

namespace {
constexpr double kClamp = 1e-12;
}

double loss_rec(std::span<const double> s, std::span<const double> recalled,
                std::span<const double> recalled_main) {
  if (s.size() != recalled.size() || s.size() != recalled_main.size()) {
    throw std::invalid_argument("loss_rec: dimension mismatch");
  }
  double acc = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double d1 = s[i] - recalled[i];
    const double d2 = s[i] - recalled_main[i];
    acc += d1 * d1 + d2 * d2;
  }
  return acc;
}

double loss_align(std::span<const double> w_b, std::span<const double> w_t,
                  std::span<const double> w_a, double alpha) {
  if (w_b.size() != w_t.size() || w_b.size() != w_a.size()) {
    throw std::invalid_argument("loss_align: length mismatch");
  }
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw std::invalid_argument("loss_align: alpha must be in (0,1)");
  }
  double acc = 0;
  for (std::size_t i = 0; i < w_b.size(); ++i) {
    const double p = std::max(w_b[i], kClamp);
    const double q =
        std::max(alpha * w_t[i] + (1.0 - alpha) * w_a[i], kClamp);
    acc += p * (std::log(p) - std::log(q));
  }
  return acc;
}

}  // namespace vattr
