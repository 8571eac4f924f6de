// SPDX-License-Identifier: Apache-2.0
#include "vattr/model.hpp"

namespace vattr {

const char* to_string(AblationMode mode) {
  switch (mode) {
    case AblationMode::kFull: return "full";
    case AblationMode::kNoVoiceRes: return "no_voice_res";
    case AblationMode::kNoResMem: return "no_resmem";
    case AblationMode::kNoVadp: return "no_vadp";
  }
  return "?";
}

std::optional<AblationMode> ablation_from_string(std::string_view name) {
  if (name == "full") return AblationMode::kFull;
  if (name == "no_voice_res") return AblationMode::kNoVoiceRes;
  if (name == "no_resmem") return AblationMode::kNoResMem;
  if (name == "no_vadp") return AblationMode::kNoVadp;
  return std::nullopt;
}

void ModelGrads::resize_like(const ModelParams& p) {
  main_values.assign(p.resmem.main_values.size(), 0.0);
  residual_values.assign(p.resmem.residual_values.size(), 0.0);
  descriptor_keys.assign(p.resmem.descriptor_keys.size(), 0.0);
  table.assign(p.encoder.table.size(), 0.0);
  weight.assign(p.encoder.weight.size(), 0.0);
  bias.assign(p.encoder.bias.size(), 0.0);
  w_hidden.assign(p.vadp.w_hidden.size(), 0.0);
  b_hidden.assign(p.vadp.b_hidden.size(), 0.0);
  w_mean.assign(p.vadp.w_mean.size(), 0.0);
  b_mean.assign(p.vadp.b_mean.size(), 0.0);
  w_logvar.assign(p.vadp.w_logvar.size(), 0.0);
  b_logvar.assign(p.vadp.b_logvar.size(), 0.0);
}

void ModelGrads::zero() {
  for (std::vector<double>* v :
       {&main_values, &residual_values, &descriptor_keys, &table, &weight,
        &bias, &w_hidden, &b_hidden, &w_mean, &b_mean, &w_logvar, &b_logvar}) {
    std::fill(v->begin(), v->end(), 0.0);
  }
}

std::vector<ParamBlockRef> bind_blocks(ModelParams& p, ModelGrads& g) {
  return {
      {"resmem.main_values", &p.resmem.main_values, &g.main_values},
      {"resmem.residual_values", &p.resmem.residual_values, &g.residual_values},
      {"resmem.descriptor_keys", &p.resmem.descriptor_keys, &g.descriptor_keys},
      {"encoder.table", &p.encoder.table, &g.table},
      {"encoder.weight", &p.encoder.weight, &g.weight},
      {"encoder.bias", &p.encoder.bias, &g.bias},
      {"vadp.w_hidden", &p.vadp.w_hidden, &g.w_hidden},
      {"vadp.b_hidden", &p.vadp.b_hidden, &g.b_hidden},
      {"vadp.w_mean", &p.vadp.w_mean, &g.w_mean},
      {"vadp.b_mean", &p.vadp.b_mean, &g.b_mean},
      {"vadp.w_logvar", &p.vadp.w_logvar, &g.w_logvar},
      {"vadp.b_logvar", &p.vadp.b_logvar, &g.b_logvar},
  };
}

std::vector<std::string> trainable_block_names(AblationMode mode) {
  const std::vector<std::string> resmem = {
      "resmem.main_values", "resmem.descriptor_keys"};
  const std::vector<std::string> encoder = {"encoder.table", "encoder.weight",
                                            "encoder.bias"};
  const std::vector<std::string> vadp = {"vadp.w_hidden", "vadp.b_hidden",
                                         "vadp.w_mean", "vadp.b_mean",
                                         "vadp.w_logvar", "vadp.b_logvar"};
  std::vector<std::string> names;
  switch (mode) {
    case AblationMode::kFull:
      names = resmem;
      names.push_back("resmem.residual_values");
      names.insert(names.end(), encoder.begin(), encoder.end());
      names.insert(names.end(), vadp.begin(), vadp.end());
      break;
    case AblationMode::kNoVoiceRes:
      names = resmem;
      names.insert(names.end(), encoder.begin(), encoder.end());
      names.insert(names.end(), vadp.begin(), vadp.end());
      break;
    case AblationMode::kNoResMem:
      names = encoder;
      break;
    case AblationMode::kNoVadp:
      names = resmem;
      names.push_back("resmem.residual_values");
      names.insert(names.end(), encoder.begin(), encoder.end());
      break;
  }
  return names;
}

}  // namespace vattr
