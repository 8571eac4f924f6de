// SPDX-License-Identifier: Apache-2.0
#include "vattr/editor.hpp"

namespace vattr {

Embedding edit_once(const Model& model, std::span<const double> source,
                    int descriptor, double alpha, AblationMode mode) {
  const auto dim = static_cast<std::size_t>(model.params.resmem.dim);
  if (source.size() != dim) {
    throw std::invalid_argument("edit_once: source dimension mismatch");
  }
  if (mode != AblationMode::kNoVadp && !(alpha >= 0.0 && alpha <= 1.0)) {
    throw std::invalid_argument("edit_once: alpha must be in [0,1]");
  }
  const Embedding t = encode_descriptor(model.params.encoder, descriptor);
  Embedding edited(dim);

  switch (mode) {
    case AblationMode::kNoResMem: {
      for (std::size_t i = 0; i < dim; ++i) {
        edited[i] = alpha * t[i] + (1.0 - alpha) * source[i];
      }
      return edited;
    }
    case AblationMode::kNoVadp: {
      const Readout t_hat = readout_descriptor(model.params.resmem, t);
      const Readout main = readout_main(model.params.resmem, source);
      for (std::size_t i = 0; i < dim; ++i) {
        edited[i] = t_hat.recalled[i] + main.recalled[i];
      }
      return edited;
    }
    case AblationMode::kNoVoiceRes: {
      const Readout t_hat = readout_descriptor(model.params.resmem, t);
      const Readout main = readout_main(model.params.resmem, source);
      for (std::size_t i = 0; i < dim; ++i) {
        edited[i] = alpha * t_hat.recalled[i] + (1.0 - alpha) * main.recalled[i];
      }
      return edited;
    }
    case AblationMode::kFull: {
      const Readout t_hat = readout_descriptor(model.params.resmem, t);
      const SpeakerRecall recall = recall_speaker(model.params.resmem, source);
      for (std::size_t i = 0; i < dim; ++i) {
        edited[i] = alpha * t_hat.recalled[i] +
                    (1.0 - alpha) * recall.main.recalled[i] +
                    recall.residual.recalled[i];
      }
      return edited;
    }
  }
  throw std::invalid_argument("edit_once: unknown mode");
}

EditResult edit_prompt(const Model& model, std::span<const double> source,
                       const std::string& prompt, double alpha,
                       const ExtractionOptions& extraction, AblationMode mode) {
  EditResult result;
  result.extraction = extract_descriptors(prompt, model.vocab, extraction);
  result.edited.assign(source.begin(), source.end());
  for (int descriptor : result.extraction.descriptors) {
    result.edited = edit_once(model, result.edited, descriptor, alpha, mode);
    result.steps.push_back(EditStep{descriptor, alpha});
  }
  return result;
}

}  // namespace vattr
