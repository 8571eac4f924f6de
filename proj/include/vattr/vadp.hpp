// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <vector>

#include "vattr/common.hpp"
#include "vattr/rng.hpp"

namespace vattr {

// Gaussian degree head over the concatenated (source, target, descriptor)
// embedding: one ReLU hidden layer, then scalar mean and log-variance heads.
// The sampled degree is squashed to (0,1) with a sigmoid.
struct VadpParams {
  int dim = 0;     // D; the input is the 3D concatenation
  int hidden = 0;  // H
  std::vector<double> w_hidden;  // H x 3D
  std::vector<double> b_hidden;  // H
  std::vector<double> w_mean;    // H
  std::vector<double> b_mean;    // 1
  std::vector<double> w_logvar;  // H
  std::vector<double> b_logvar;  // 1
};

struct DegreeSample {
  double alpha = 0;    // sigmoid(mu + sigma * eps), strictly in (0,1)
  double mu = 0;
  double log_var = 0;
  double eps = 0;      // the standard-normal draw used
};

// Weights uniform on [-1/sqrt(fan_in), 1/sqrt(fan_in)] per layer, biases
// zero. Draw order: w_hidden, w_mean, w_logvar.
VadpParams init_vadp(int dim, int hidden, Rng& rng);

// eps comes from the caller: a seeded normal draw during training, 0 for a
// deterministic evaluation.
DegreeSample predict_degree(const VadpParams& params,
                            std::span<const double> source,
                            std::span<const double> target,
                            std::span<const double> descriptor, double eps);

double sigmoid(double x);

}  // namespace vattr
