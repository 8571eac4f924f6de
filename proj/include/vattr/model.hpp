// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "vattr/gradcheck.hpp"
#include "vattr/memnet.hpp"
#include "vattr/vadp.hpp"
#include "vattr/vocab.hpp"

namespace vattr {

// full         - complete model
// no_voice_res - residual voice-value memory removed
// no_resmem    - no memories at all, raw-embedding interpolation baseline
// no_vadp      - degree prediction removed, fixed-degree editing
enum class AblationMode { kFull, kNoVoiceRes, kNoResMem, kNoVadp };

const char* to_string(AblationMode mode);
std::optional<AblationMode> ablation_from_string(std::string_view name);

// Everything trainable, as one bundle.
struct ModelParams {
  ResMemParams resmem;
  DescriptorEncoderParams encoder;
  VadpParams vadp;
};

// Gradient buffers matching ModelParams block-for-block.
struct ModelGrads {
  std::vector<double> main_values, residual_values, descriptor_keys;
  std::vector<double> table, weight, bias;
  std::vector<double> w_hidden, b_hidden, w_mean, b_mean, w_logvar, b_logvar;

  void resize_like(const ModelParams& params);
  void zero();
};

// Name-indexed views over every parameter block, in a fixed documented
// order (the checkpoint and optimizer-state layouts follow it).
std::vector<ParamBlockRef> bind_blocks(ModelParams& params, ModelGrads& grads);

// Blocks the optimizer may update in a given ablation mode. Untouched blocks
// are excluded entirely so decoupled weight decay cannot drift them.
std::vector<std::string> trainable_block_names(AblationMode mode);

// A trained artifact: enough to edit and evaluate without the training data.
struct Model {
  DescriptorVocab vocab;
  ModelParams params;
};

}  // namespace vattr
