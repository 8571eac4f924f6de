// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <vector>

#include "vattr/common.hpp"
#include "vattr/rng.hpp"

namespace vattr {

// Norm guard for cosine similarity; queries with a smaller norm are rejected,
// and the guard is added to each norm so the expression stays differentiable.
inline constexpr double kNormEpsilon = 1e-8;

// Slot memories of the residual-memory block. main_values and
// descriptor_keys share the slot count M; residual_values has N slots. All
// three are row-major slot matrices with D columns. softmax_scale multiplies
// the cosine similarities before normalization (1.0 reproduces the plain
// softmax-over-cosines readout).
struct ResMemParams {
  int main_slots = 0;      // M
  int residual_slots = 0;  // N
  int dim = 0;             // D
  double softmax_scale = 1.0;
  std::vector<double> main_values;      // M x D
  std::vector<double> residual_values;  // N x D
  std::vector<double> descriptor_keys;  // M x D
};

// Embedding table + linear layer + ReLU.
struct DescriptorEncoderParams {
  int vocab_size = 0;  // V
  int dim = 0;         // D
  std::vector<double> table;   // V x D
  std::vector<double> weight;  // D x D
  std::vector<double> bias;    // D
};

// One slot readout: softmax weights over slots and the convex combination of
// value rows they select.
struct Readout {
  std::vector<double> weights;
  Embedding recalled;
};

struct SpeakerRecall {
  Readout main;      // over main_values
  Readout residual;  // over residual_values
  Embedding combined;  // main.recalled + residual.recalled
};

// Entries drawn i.i.d. uniform on [-1/sqrt(D), 1/sqrt(D)] in block order
// main_values, residual_values, descriptor_keys, table, weight; biases zero;
// softmax_scale 1.
std::pair<ResMemParams, DescriptorEncoderParams> init_params(int main_slots,
                                                             int residual_slots,
                                                             int dim,
                                                             int vocab_size,
                                                             Rng& rng);

Embedding encode_descriptor(const DescriptorEncoderParams& params,
                            int descriptor_id);

// Query a speaker embedding against the main voice-value slots.
Readout readout_main(const ResMemParams& params, std::span<const double> s);

// Query a speaker embedding against the residual voice-value slots.
Readout readout_residual(const ResMemParams& params, std::span<const double> s);

SpeakerRecall recall_speaker(const ResMemParams& params,
                             std::span<const double> s);

// Query a descriptor embedding against the descriptor keys; the recalled
// vector is read from the main voice-value slots.
Readout readout_descriptor(const ResMemParams& params,
                           std::span<const double> t);

// --- shared numeric helpers ---------------------------------------------------

double guarded_cosine(std::span<const double> a, std::span<const double> b);

// softmax(scale * x) with max subtraction, in place.
void scaled_softmax_inplace(std::vector<double>& x, double scale);

// Throws NumericError naming the offending slot if any row norm is below the
// guard. Checked at init and after every optimizer step.
void check_slot_norms(const ResMemParams& params);

}  // namespace vattr
