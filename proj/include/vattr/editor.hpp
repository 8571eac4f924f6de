// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <string>
#include <vector>

#include "vattr/extract.hpp"
#include "vattr/model.hpp"

namespace vattr {

// One interpolation edit of a source embedding toward a descriptor.
//   full:         alpha * t_hat + (1-alpha) * s_main_hat + s_residual_hat
//   no_voice_res: alpha * t_hat + (1-alpha) * s_main_hat
//   no_resmem:    alpha * t     + (1-alpha) * s           (raw embeddings)
//   no_vadp:      t_hat + s_main_hat                      (alpha ignored)
// alpha must be in [0,1] except in no_vadp mode, where it is ignored.
Embedding edit_once(const Model& model, std::span<const double> source,
                    int descriptor, double alpha, AblationMode mode);

struct EditStep {
  int descriptor;
  double alpha;
};

struct EditResult {
  Embedding edited;
  ExtractionResult extraction;
  std::vector<EditStep> steps;  // applied in order, each output feeding the next
};

// Extracts descriptors from the prompt and applies them sequentially with
// the same alpha at every step.
EditResult edit_prompt(const Model& model, std::span<const double> source,
                       const std::string& prompt, double alpha,
                       const ExtractionOptions& extraction, AblationMode mode);

}  // namespace vattr
