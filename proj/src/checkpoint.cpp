// SPDX-License-Identifier: Apache-2.0
#include "vattr/checkpoint.hpp"

#include <fstream>

#include <json.hpp>

namespace vattr {

namespace {

using nlohmann::json;

constexpr const char* kFormat = "vattr-checkpoint-v1";

json config_to_json(const TrainConfig& c) {
  return json{{"lambda_rec", c.lambda_rec},
              {"lambda_align", c.lambda_align},
              {"lr", c.adamw.lr},
              {"beta1", c.adamw.beta1},
              {"beta2", c.adamw.beta2},
              {"adam_eps", c.adamw.eps},
              {"weight_decay", c.adamw.weight_decay},
              {"batch_size", c.batch_size},
              {"steps", c.steps},
              {"seed", c.seed},
              {"softmax_scale", c.softmax_scale},
              {"main_slots", c.main_slots},
              {"residual_slots", c.residual_slots},
              {"hidden", c.hidden},
              {"mode", to_string(c.mode)}};
}

TrainConfig config_from_json(const json& j) {
  TrainConfig c;
  c.lambda_rec = j.at("lambda_rec").get<double>();
  c.lambda_align = j.at("lambda_align").get<double>();
  c.adamw.lr = j.at("lr").get<double>();
  c.adamw.beta1 = j.at("beta1").get<double>();
  c.adamw.beta2 = j.at("beta2").get<double>();
  c.adamw.eps = j.at("adam_eps").get<double>();
  c.adamw.weight_decay = j.at("weight_decay").get<double>();
  c.batch_size = j.at("batch_size").get<int>();
  c.steps = j.at("steps").get<long long>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.softmax_scale = j.at("softmax_scale").get<double>();
  c.main_slots = j.at("main_slots").get<int>();
  c.residual_slots = j.at("residual_slots").get<int>();
  c.hidden = j.at("hidden").get<int>();
  const auto mode = ablation_from_string(j.at("mode").get<std::string>());
  if (!mode) throw DataError("checkpoint: unknown ablation mode");
  c.mode = *mode;
  return c;
}

}  // namespace

std::string checkpoint_to_json(const Checkpoint& ckpt) {
  json j;
  j["format"] = kFormat;
  j["config"] = config_to_json(ckpt.config);
  j["vocab"] = ckpt.vocab.names();
  j["rng_algo"] = Rng::kAlgorithm;
  j["rng_state"] = ckpt.rng_state;
  j["step"] = ckpt.step;

  const ResMemParams& mem = ckpt.params.resmem;
  j["resmem"] = {{"main_slots", mem.main_slots},
                 {"residual_slots", mem.residual_slots},
                 {"dim", mem.dim},
                 {"softmax_scale", mem.softmax_scale},
                 {"main_values", mem.main_values},
                 {"residual_values", mem.residual_values},
                 {"descriptor_keys", mem.descriptor_keys}};
  const DescriptorEncoderParams& enc = ckpt.params.encoder;
  j["encoder"] = {{"vocab_size", enc.vocab_size},
                  {"dim", enc.dim},
                  {"table", enc.table},
                  {"weight", enc.weight},
                  {"bias", enc.bias}};
  const VadpParams& vadp = ckpt.params.vadp;
  j["vadp"] = {{"dim", vadp.dim},         {"hidden", vadp.hidden},
               {"w_hidden", vadp.w_hidden}, {"b_hidden", vadp.b_hidden},
               {"w_mean", vadp.w_mean},     {"b_mean", vadp.b_mean},
               {"w_logvar", vadp.w_logvar}, {"b_logvar", vadp.b_logvar}};

  json moments = json::object();
  for (const auto& [name, mm] : ckpt.moments) {
    moments[name] = {{"m", mm.m}, {"v", mm.v}};
  }
  j["adamw_moments"] = moments;

  json history = json::array();
  for (const LossRow& row : ckpt.history) {
    history.push_back({row.step, row.total, row.rec, row.align});
  }
  j["loss_history"] = history;

  return j.dump(1) + "\n";
}

Checkpoint checkpoint_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw DataError(std::string("checkpoint: bad JSON: ") + e.what());
  }
  if (j.value("format", "") != kFormat) {
    throw DataError("checkpoint: missing or unsupported format tag");
  }
  Checkpoint ckpt;
  ckpt.config = config_from_json(j.at("config"));
  ckpt.vocab =
      DescriptorVocab::from_names(j.at("vocab").get<std::vector<std::string>>());
  ckpt.rng_state = j.at("rng_state").get<std::string>();
  ckpt.step = j.at("step").get<long long>();

  const json& mem = j.at("resmem");
  ckpt.params.resmem.main_slots = mem.at("main_slots").get<int>();
  ckpt.params.resmem.residual_slots = mem.at("residual_slots").get<int>();
  ckpt.params.resmem.dim = mem.at("dim").get<int>();
  ckpt.params.resmem.softmax_scale = mem.at("softmax_scale").get<double>();
  ckpt.params.resmem.main_values =
      mem.at("main_values").get<std::vector<double>>();
  ckpt.params.resmem.residual_values =
      mem.at("residual_values").get<std::vector<double>>();
  ckpt.params.resmem.descriptor_keys =
      mem.at("descriptor_keys").get<std::vector<double>>();

  const json& enc = j.at("encoder");
  ckpt.params.encoder.vocab_size = enc.at("vocab_size").get<int>();
  ckpt.params.encoder.dim = enc.at("dim").get<int>();
  ckpt.params.encoder.table = enc.at("table").get<std::vector<double>>();
  ckpt.params.encoder.weight = enc.at("weight").get<std::vector<double>>();
  ckpt.params.encoder.bias = enc.at("bias").get<std::vector<double>>();

  const json& vadp = j.at("vadp");
  ckpt.params.vadp.dim = vadp.at("dim").get<int>();
  ckpt.params.vadp.hidden = vadp.at("hidden").get<int>();
  ckpt.params.vadp.w_hidden = vadp.at("w_hidden").get<std::vector<double>>();
  ckpt.params.vadp.b_hidden = vadp.at("b_hidden").get<std::vector<double>>();
  ckpt.params.vadp.w_mean = vadp.at("w_mean").get<std::vector<double>>();
  ckpt.params.vadp.b_mean = vadp.at("b_mean").get<std::vector<double>>();
  ckpt.params.vadp.w_logvar = vadp.at("w_logvar").get<std::vector<double>>();
  ckpt.params.vadp.b_logvar = vadp.at("b_logvar").get<std::vector<double>>();

  for (const auto& [name, mm] : j.at("adamw_moments").items()) {
    AdamWMoments moments;
    moments.m = mm.at("m").get<std::vector<double>>();
    moments.v = mm.at("v").get<std::vector<double>>();
    ckpt.moments.emplace(name, std::move(moments));
  }

  for (const json& row : j.at("loss_history")) {
    ckpt.history.push_back(LossRow{row.at(0).get<long long>(),
                                   row.at(1).get<double>(),
                                   row.at(2).get<double>(),
                                   row.at(3).get<double>()});
  }
  return ckpt;
}

void save_checkpoint(const Checkpoint& checkpoint,
                     const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << checkpoint_to_json(checkpoint);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("checkpoint not readable: " + path.string());
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return checkpoint_from_json(text);
}

}  // namespace vattr
