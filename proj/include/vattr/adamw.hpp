// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <vector>

namespace vattr {

struct AdamWConfig {
  double lr = 2e-4;
  double beta1 = 0.8;
  double beta2 = 0.99;
  double eps = 1e-8;
  double weight_decay = 0.01;
};

struct AdamWMoments {
  std::vector<double> m;
  std::vector<double> v;

  void resize(std::size_t n) {
    m.assign(n, 0.0);
    v.assign(n, 0.0);
  }
};

// One bias-corrected update with decoupled weight decay; `step` counts from 1.
void adamw_step(std::span<double> params, std::span<const double> grads,
                AdamWMoments& moments, long long step,
                const AdamWConfig& config);

}  // namespace vattr
