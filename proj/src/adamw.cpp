// SPDX-License-Identifier: Apache-2.0
#include "vattr/adamw.hpp"

#include <cmath>
#include <stdexcept>

#include "vattr/kernels.hpp"

namespace vattr {

void adamw_step(std::span<double> params, std::span<const double> grads,
                AdamWMoments& moments, long long step,
                const AdamWConfig& config) {
  if (params.size() != grads.size() || moments.m.size() != params.size() ||
      moments.v.size() != params.size()) {
    throw std::invalid_argument("adamw_step: shape mismatch");
  }
  if (step < 1) throw std::invalid_argument("adamw_step: step counts from 1");
  const double bc1 = 1.0 - std::pow(config.beta1, static_cast<double>(step));
  const double bc2 = 1.0 - std::pow(config.beta2, static_cast<double>(step));
  kernels::adamw_update(params.data(), grads.data(), moments.m.data(),
                        moments.v.data(), params.size(), config.lr,
                        config.beta1, config.beta2, config.eps,
                        config.weight_decay, bc1, bc2);
}

}  // namespace vattr
