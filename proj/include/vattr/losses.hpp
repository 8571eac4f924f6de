// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>

namespace vattr {

// ||s - recalled||^2 + ||s - recalled_main||^2. "MSE" here is the literal
// squared L2 distance, never averaged over the dimension.
double loss_rec(std::span<const double> s, std::span<const double> recalled,
                std::span<const double> recalled_main);

// KL(w_b || alpha * w_t + (1 - alpha) * w_a) over slot-weight distributions,
// with probabilities clamped at 1e-12 before the logs.
double loss_align(std::span<const double> w_b, std::span<const double> w_t,
                  std::span<const double> w_a, double alpha);

}  // namespace vattr
