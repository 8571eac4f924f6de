// SPDX-License-Identifier: Apache-2.0
#include "vattr/memnet.hpp"

#include <algorithm>
#include <cmath>

#include "vattr/kernels.hpp"

namespace vattr {

namespace {

void check_query(std::span<const double> q, const char* what) {
  const double norm = std::sqrt(kernels::dot(q.data(), q.data(), q.size()));
  if (!(norm > kNormEpsilon)) {
    throw NumericError(std::string(what) + ": zero-norm query");
  }
}

// weights_i = softmax(scale * cos(q, key_i)); recalled = sum_i w_i * value_i
Readout slot_readout(const double* keys, const double* values, int nslots,
                     int dim, std::span<const double> q, double scale) {
  const auto n = static_cast<std::size_t>(nslots);
  const auto d = static_cast<std::size_t>(dim);
  Readout r;
  r.weights.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    r.weights[i] = guarded_cosine(q, std::span(keys + i * d, d));
  }
  scaled_softmax_inplace(r.weights, scale);
  r.recalled.assign(d, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    kernels::axpy(r.weights[i], values + i * d, r.recalled.data(), d);
  }
  return r;
}

}  // namespace

double guarded_cosine(std::span<const double> a, std::span<const double> b) {
  const double na = std::sqrt(kernels::dot(a.data(), a.data(), a.size()));
  const double nb = std::sqrt(kernels::dot(b.data(), b.data(), b.size()));
  return kernels::dot(a.data(), b.data(), a.size()) /
         ((na + kNormEpsilon) * (nb + kNormEpsilon));
}

void scaled_softmax_inplace(std::vector<double>& x, double scale) {
  double hi = -HUGE_VAL;
  for (double& v : x) {
    v *= scale;
    hi = std::max(hi, v);
  }
  double sum = 0.0;
  for (double& v : x) {
    v = std::exp(v - hi);
    sum += v;
  }
  for (double& v : x) v /= sum;
}

std::pair<ResMemParams, DescriptorEncoderParams> init_params(
    int main_slots, int residual_slots, int dim, int vocab_size, Rng& rng) {
  if (main_slots < 1 || residual_slots < 1 || dim < 1 || vocab_size < 1) {
    throw std::invalid_argument("init_params: all sizes must be >= 1");
  }
  const double bound = 1.0 / std::sqrt(static_cast<double>(dim));
  const auto fill = [&](std::vector<double>& v, std::size_t n) {
    v.resize(n);
    for (double& x : v) x = rng.uniform(-bound, bound);
  };

  ResMemParams mem;
  mem.main_slots = main_slots;
  mem.residual_slots = residual_slots;
  mem.dim = dim;
  mem.softmax_scale = 1.0;
  const auto d = static_cast<std::size_t>(dim);
  fill(mem.main_values, static_cast<std::size_t>(main_slots) * d);
  fill(mem.residual_values, static_cast<std::size_t>(residual_slots) * d);
  fill(mem.descriptor_keys, static_cast<std::size_t>(main_slots) * d);

  DescriptorEncoderParams enc;
  enc.vocab_size = vocab_size;
  enc.dim = dim;
  fill(enc.table, static_cast<std::size_t>(vocab_size) * d);
  fill(enc.weight, d * d);
  enc.bias.assign(d, 0.0);

  check_slot_norms(mem);
  return {std::move(mem), std::move(enc)};
}

Embedding encode_descriptor(const DescriptorEncoderParams& params,
                            int descriptor_id) {
  if (descriptor_id < 0 || descriptor_id >= params.vocab_size) {
    throw std::invalid_argument("descriptor id out of range: " +
                                std::to_string(descriptor_id));
  }
  const auto d = static_cast<std::size_t>(params.dim);
  const double* row = params.table.data() + static_cast<std::size_t>(descriptor_id) * d;
  Embedding t(d);
  for (std::size_t r = 0; r < d; ++r) {
    t[r] = kernels::dot(params.weight.data() + r * d, row, d) + params.bias[r];
  }
  kernels::relu(t.data(), t.data(), d);
  return t;
}

Readout readout_main(const ResMemParams& params, std::span<const double> s) {
  check_query(s, "readout_main");
  return slot_readout(params.main_values.data(), params.main_values.data(),
                      params.main_slots, params.dim, s, params.softmax_scale);
}

Readout readout_residual(const ResMemParams& params,
                         std::span<const double> s) {
  check_query(s, "readout_residual");
  return slot_readout(params.residual_values.data(),
                      params.residual_values.data(), params.residual_slots,
                      params.dim, s, params.softmax_scale);
}

SpeakerRecall recall_speaker(const ResMemParams& params,
                             std::span<const double> s) {
  SpeakerRecall rec;
  rec.main = readout_main(params, s);
  rec.residual = readout_residual(params, s);
  rec.combined.resize(rec.main.recalled.size());
  for (std::size_t i = 0; i < rec.combined.size(); ++i) {
    rec.combined[i] = rec.main.recalled[i] + rec.residual.recalled[i];
  }
  return rec;
}

Readout readout_descriptor(const ResMemParams& params,
                           std::span<const double> t) {
  check_query(t, "readout_descriptor");
  return slot_readout(params.descriptor_keys.data(),
                      params.main_values.data(), params.main_slots, params.dim,
                      t, params.softmax_scale);
}

void check_slot_norms(const ResMemParams& params) {
  const auto d = static_cast<std::size_t>(params.dim);
  const auto check = [&](const std::vector<double>& mat, int nslots,
                         const char* name) {
    for (int i = 0; i < nslots; ++i) {
      const double* row = mat.data() + static_cast<std::size_t>(i) * d;
      const double norm = std::sqrt(kernels::dot(row, row, d));
      if (!(norm > kNormEpsilon)) {
        throw NumericError(std::string(name) + " slot " + std::to_string(i) +
                           " has near-zero norm");
      }
    }
  };
  check(params.main_values, params.main_slots, "main_values");
  check(params.residual_values, params.residual_slots, "residual_values");
  check(params.descriptor_keys, params.main_slots, "descriptor_keys");
}

}  // namespace vattr
