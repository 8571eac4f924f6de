// SPDX-License-Identifier: Apache-2.0
#include "vattr/gradcheck.hpp"

#include <cmath>
#include <stdexcept>

namespace vattr {

std::vector<double> finite_difference(
    const std::function<long double()>& loss, std::vector<double>& value,
    double h) {
  if (!(h > 0)) throw std::invalid_argument("finite_difference: h must be > 0");
  std::vector<double> grad(value.size());
  for (std::size_t i = 0; i < value.size(); ++i) {
    const double saved = value[i];
    value[i] = saved + h;
    const long double up = loss();
    value[i] = saved - h;
    const long double down = loss();
    value[i] = saved;
    grad[i] = static_cast<double>((up - down) / (2.0L * static_cast<long double>(h)));
  }
  return grad;
}

GradReport check_gradients(const std::function<long double()>& loss,
                           const std::vector<ParamBlockRef>& blocks, double h,
                           double tolerance) {
  GradReport report;
  report.tolerance = tolerance;
  for (const ParamBlockRef& block : blocks) {
    GradReport::BlockResult res;
    res.name = block.name;
    const std::vector<double> numeric = finite_difference(loss, *block.value, h);
    for (std::size_t i = 0; i < numeric.size(); ++i) {
      const double a = (*block.grad)[i];
      const double n = numeric[i];
      const double denom = std::max({std::fabs(a), std::fabs(n), 1e-8});
      const double rel = std::fabs(a - n) / denom;
      if (rel > res.max_rel_err) {
        res.max_rel_err = rel;
        res.worst_index = i;
        res.analytic = a;
        res.numeric = n;
      }
    }
    report.max_rel_err = std::max(report.max_rel_err, res.max_rel_err);
    report.blocks.push_back(std::move(res));
  }
  report.pass = report.max_rel_err < tolerance;
  return report;
}

}  // namespace vattr
