// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <string>
#include <vector>

namespace vattr {

// A named view of one trainable block and, after a backward pass, its
// analytic gradient. `value` is perturbed in place by the checker and always
// restored.
struct ParamBlockRef {
  std::string name;
  std::vector<double>* value;
  std::vector<double>* grad;
};

struct GradReport {
  struct BlockResult {
    std::string name;
    double max_rel_err = 0;
    std::size_t worst_index = 0;
    double analytic = 0;
    double numeric = 0;
  };
  std::vector<BlockResult> blocks;
  double max_rel_err = 0;
  double tolerance = 0;
  bool pass = false;
};

// Central differences (f(x+h) - f(x-h)) / 2h per coordinate. The loss is
// evaluated in extended precision so the difference quotient is not limited
// by double rounding of the loss value; plain double-returning callables
// convert implicitly.
std::vector<double> finite_difference(
    const std::function<long double()>& loss, std::vector<double>& value,
    double h);

// Compares analytic gradients (already in block.grad) against central
// finite differences of `loss`. Relative error uses a
// max(|analytic|, |numeric|, 1e-8) denominator.
GradReport check_gradients(const std::function<long double()>& loss,
                           const std::vector<ParamBlockRef>& blocks, double h,
                           double tolerance);

}  // namespace vattr
