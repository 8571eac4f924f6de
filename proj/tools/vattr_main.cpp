// SPDX-License-Identifier: Apache-2.0
//
// vattr - voice attribute editing toolkit
//
// Subcommands: train | edit | eval | stats | synth | gradcheck. Every value
// can come from a TOML config file (--config); command-line flags override
// config values, which override built-in defaults. Each command writes a
// run manifest with the effective configuration next to its outputs.
//
// Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "vattr/checkpoint.hpp"
#include "vattr/editor.hpp"
#include "vattr/metrics.hpp"
#include "vattr/resources.hpp"
#include "vattr/synthetic.hpp"
#include "vattr/toml.hpp"
#include "vattr/trainer.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

constexpr const char* kManifestFormat = "vattr-manifest-v1";

struct CommonOpts {
  std::string config_path;
  std::string output_dir = ".";
  int jobs = 1;
};

vattr::toml::Table load_config(const CommonOpts& common) {
  if (common.config_path.empty()) return {};
  return vattr::toml::parse_file(common.config_path);
}

// config-file fallback for options the user did not pass on the command line
template <typename T>
void fallback(const CLI::Option* opt, const vattr::toml::Table& table,
              const std::string& key, T& target) {
  if (opt && opt->count() > 0) return;  // explicit flag wins
  if constexpr (std::is_same_v<T, std::string>) {
    if (const auto v = table.get_string(key)) target = *v;
  } else if constexpr (std::is_same_v<T, bool>) {
    if (const auto v = table.get_boolean(key)) target = *v;
  } else if constexpr (std::is_floating_point_v<T>) {
    if (const auto v = table.get_number(key)) target = static_cast<T>(*v);
  } else {
    if (const auto v = table.get_integer(key)) target = static_cast<T>(*v);
  }
}

void write_manifest(const CommonOpts& common, const std::string& command,
                    const json& effective) {
  fs::create_directories(common.output_dir);
  json manifest;
  manifest["format"] = kManifestFormat;
  manifest["command"] = command;
  manifest["config"] = effective;
  manifest["format_versions"] = {{"checkpoint", "vattr-checkpoint-v1"},
                                 {"synthtruth", "vattr-synthtruth-v1"},
                                 {"annotations", "tsv-v1"},
                                 {"embeddings", "jsonl-v1"},
                                 {"tvas_csv", "csv-v1"}};
  manifest["rng_algo"] = vattr::Rng::kAlgorithm;
  const fs::path path =
      fs::path(common.output_dir) / (command + "_manifest.json");
  std::ofstream out(path);
  if (!out) throw vattr::DataError("cannot write " + path.string());
  out << manifest.dump(1) << '\n';
}

vattr::DescriptorVocab load_vocab(const std::string& vocab_path) {
  if (vocab_path.empty()) return vattr::DescriptorVocab::builtin_default();
  return vattr::DescriptorVocab::load(vocab_path);
}

vattr::AblationMode parse_mode(const std::string& name) {
  const auto mode = vattr::ablation_from_string(name);
  if (!mode) {
    throw UsageError("unknown mode \"" + name +
                     "\" (full|no_voice_res|no_resmem|no_vadp)");
  }
  return *mode;
}

// Deterministic parallel map: results land in a pre-sized vector by index.
template <typename Fn>
void parallel_for(std::size_t count, int jobs, Fn&& fn) {
  if (jobs <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  const int workers = std::min<int>(jobs, static_cast<int>(count));
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&next, count, &fn] {
      while (true) {
        const std::size_t i = next.fetch_add(1);
        if (i >= count) return;
        fn(i);
      }
    });
  }
  for (std::thread& t : pool) t.join();
}

// --- train --------------------------------------------------------------------

int cmd_train(const CommonOpts& common, const CLI::App* app,
              std::string embeddings_path, std::string annotations_path,
              std::string vocab_path, std::string checkpoint_out,
              std::string resume_path, vattr::TrainConfig config,
              std::string mode_name) {
  const auto table = load_config(common);
  fallback(app->get_option("--embeddings"), table, "paths.embeddings",
           embeddings_path);
  fallback(app->get_option("--annotations"), table, "paths.annotations",
           annotations_path);
  fallback(app->get_option("--vocab"), table, "paths.vocab", vocab_path);
  fallback(app->get_option("--checkpoint"), table, "paths.checkpoint",
           checkpoint_out);
  fallback(app->get_option("--steps"), table, "train.steps", config.steps);
  fallback(app->get_option("--batch-size"), table, "train.batch_size",
           config.batch_size);
  fallback(app->get_option("--seed"), table, "train.seed", config.seed);
  fallback(app->get_option("--lr"), table, "train.lr", config.adamw.lr);
  fallback(app->get_option("--beta1"), table, "train.beta1",
           config.adamw.beta1);
  fallback(app->get_option("--beta2"), table, "train.beta2",
           config.adamw.beta2);
  fallback(app->get_option("--weight-decay"), table, "train.weight_decay",
           config.adamw.weight_decay);
  fallback(app->get_option("--lambda-rec"), table, "train.lambda_rec",
           config.lambda_rec);
  fallback(app->get_option("--lambda-align"), table, "train.lambda_align",
           config.lambda_align);
  fallback(app->get_option("--tau"), table, "train.softmax_scale",
           config.softmax_scale);
  fallback(app->get_option("--main-slots"), table, "train.main_slots",
           config.main_slots);
  fallback(app->get_option("--residual-slots"), table, "train.residual_slots",
           config.residual_slots);
  fallback(app->get_option("--hidden"), table, "train.hidden", config.hidden);
  fallback(app->get_option("--mode"), table, "train.mode", mode_name);
  config.mode = parse_mode(mode_name);

  if (embeddings_path.empty()) {
    throw UsageError("missing required key: paths.embeddings (--embeddings)");
  }
  if (annotations_path.empty()) {
    throw UsageError("missing required key: paths.annotations (--annotations)");
  }
  if (checkpoint_out.empty()) {
    checkpoint_out = (fs::path(common.output_dir) / "checkpoint.json").string();
  }

  const vattr::EmbeddingStore store = vattr::load_embeddings(embeddings_path);

  vattr::Checkpoint ckpt;
  vattr::DescriptorVocab vocab = load_vocab(vocab_path);
  if (!resume_path.empty()) {
    const vattr::Checkpoint prev = vattr::load_checkpoint(resume_path);
    vocab = prev.vocab;
    const auto tuples = vattr::parse_annotations(annotations_path, vocab);
    ckpt = vattr::resume_train(prev, store, tuples, config.steps);
  } else {
    const auto tuples = vattr::parse_annotations(annotations_path, vocab);
    ckpt = vattr::train(config, vocab, store, tuples);
  }

  fs::create_directories(fs::path(checkpoint_out).parent_path().empty()
                             ? "."
                             : fs::path(checkpoint_out).parent_path());
  vattr::save_checkpoint(ckpt, checkpoint_out);
  fs::create_directories(common.output_dir);
  const fs::path loss_csv = fs::path(common.output_dir) / "loss.csv";
  vattr::write_loss_csv(ckpt.history, loss_csv);

  json effective;
  effective["paths"] = {{"embeddings", embeddings_path},
                        {"annotations", annotations_path},
                        {"vocab", vocab_path},
                        {"checkpoint", checkpoint_out},
                        {"resume", resume_path}};
  effective["train"] = {{"steps", ckpt.config.steps},
                        {"batch_size", ckpt.config.batch_size},
                        {"seed", ckpt.config.seed},
                        {"lr", ckpt.config.adamw.lr},
                        {"beta1", ckpt.config.adamw.beta1},
                        {"beta2", ckpt.config.adamw.beta2},
                        {"weight_decay", ckpt.config.adamw.weight_decay},
                        {"lambda_rec", ckpt.config.lambda_rec},
                        {"lambda_align", ckpt.config.lambda_align},
                        {"softmax_scale", ckpt.config.softmax_scale},
                        {"main_slots", ckpt.config.main_slots},
                        {"residual_slots", ckpt.config.residual_slots},
                        {"hidden", ckpt.config.hidden},
                        {"mode", vattr::to_string(ckpt.config.mode)}};
  write_manifest(common, "train", effective);

  if (!ckpt.history.empty()) {
    std::printf("trained %lld steps: loss %.6f (rec %.6f, align %.6f)\n",
                ckpt.step, ckpt.history.back().total, ckpt.history.back().rec,
                ckpt.history.back().align);
  }
  std::printf("checkpoint: %s\nloss log:   %s\n", checkpoint_out.c_str(),
              loss_csv.string().c_str());
  return 0;
}

// --- edit ---------------------------------------------------------------------

int cmd_edit(const CommonOpts& common, const CLI::App* app,
             std::string checkpoint_path, std::string embeddings_path,
             std::string speaker, std::string utterance, std::string prompt,
             double alpha, std::string mode_name, std::string backend_name,
             std::string out_path, vattr::LlmConfig llm) {
  const auto table = load_config(common);
  fallback(app->get_option("--checkpoint"), table, "paths.checkpoint",
           checkpoint_path);
  fallback(app->get_option("--embeddings"), table, "paths.embeddings",
           embeddings_path);
  fallback(app->get_option("--alpha"), table, "edit.alpha", alpha);
  fallback(app->get_option("--backend"), table, "edit.backend", backend_name);
  fallback(app->get_option("--llm-base-url"), table, "llm.base_url",
           llm.base_url);
  fallback(app->get_option("--llm-model"), table, "llm.model", llm.model);
  fallback(app->get_option("--llm-path"), table, "llm.path", llm.path);

  if (checkpoint_path.empty()) {
    throw UsageError("missing required key: paths.checkpoint (--checkpoint)");
  }
  if (embeddings_path.empty()) {
    throw UsageError("missing required key: paths.embeddings (--embeddings)");
  }

  const vattr::Checkpoint ckpt = vattr::load_checkpoint(checkpoint_path);
  const vattr::Model model = ckpt.model();
  vattr::AblationMode mode = ckpt.config.mode;
  if (app->get_option("--mode")->count() > 0 || table.contains("edit.mode")) {
    fallback(app->get_option("--mode"), table, "edit.mode", mode_name);
    mode = parse_mode(mode_name);
  }
  if (mode == vattr::AblationMode::kNoVadp &&
      app->get_option("--alpha")->count() > 0) {
    std::fprintf(stderr, "warning: --alpha is ignored in mode no_vadp\n");
  }

  const vattr::EmbeddingStore store = vattr::load_embeddings(embeddings_path);
  const vattr::SpeakerRecord& rec = store.at(speaker);
  vattr::Embedding source;
  if (utterance.empty()) {
    source = store.mean_embedding(speaker);
  } else {
    const auto it = std::find_if(
        rec.utterances.begin(), rec.utterances.end(),
        [&](const auto& u) { return u.first == utterance; });
    if (it == rec.utterances.end()) {
      throw vattr::DataError("unknown utterance " + utterance +
                             " for speaker " + speaker);
    }
    source = it->second;
  }

  vattr::ExtractionOptions extraction;
  extraction.llm = llm;
  if (backend_name == "llm") {
    extraction.backend = vattr::ExtractionBackend::kLlm;
  } else if (backend_name != "lexical") {
    throw UsageError("unknown backend \"" + backend_name +
                     "\" (lexical|llm)");
  }

  const vattr::EditResult result =
      vattr::edit_prompt(model, source, prompt, alpha, extraction, mode);

  for (std::size_t i = 0; i < result.extraction.descriptors.size(); ++i) {
    std::printf("matched descriptor: %s (%s)\n",
                model.vocab.name(result.extraction.descriptors[i]).c_str(),
                vattr::to_string(result.extraction.provenance[i]));
  }

  if (out_path.empty()) {
    out_path = (fs::path(common.output_dir) / "edited.jsonl").string();
  }
  fs::create_directories(common.output_dir);
  json record;
  record["speaker"] = speaker + "_edited";
  record["gender"] = std::string(1, vattr::gender_char(rec.gender));
  record["utt"] = utterance.empty() ? "mean" : utterance;
  record["dim"] = result.edited.size();
  record["vec"] = result.edited;
  record["source_speaker"] = speaker;
  json names = json::array();
  for (int id : result.extraction.descriptors) {
    names.push_back(model.vocab.name(id));
  }
  record["descriptors"] = names;
  record["alpha"] = alpha;
  record["mode"] = vattr::to_string(mode);
  std::ofstream out(out_path);
  if (!out) throw vattr::DataError("cannot write " + out_path);
  out << record.dump() << '\n';

  json effective;
  effective["paths"] = {{"checkpoint", checkpoint_path},
                        {"embeddings", embeddings_path},
                        {"out", out_path}};
  effective["edit"] = {{"speaker", speaker},
                       {"utterance", utterance},
                       {"prompt", prompt},
                       {"alpha", alpha},
                       {"mode", vattr::to_string(mode)},
                       {"backend", backend_name}};
  write_manifest(common, "edit", effective);
  std::printf("edited embedding: %s\n", out_path.c_str());
  return 0;
}

// --- eval ---------------------------------------------------------------------

int cmd_eval(const CommonOpts& common, const CLI::App* app,
             std::string checkpoint_path, std::string embeddings_path,
             std::string annotations_path, double grid_step,
             std::string mode_name) {
  const auto table = load_config(common);
  fallback(app->get_option("--checkpoint"), table, "paths.checkpoint",
           checkpoint_path);
  fallback(app->get_option("--embeddings"), table, "paths.embeddings",
           embeddings_path);
  fallback(app->get_option("--annotations"), table, "paths.annotations",
           annotations_path);
  fallback(app->get_option("--grid-step"), table, "eval.grid_step", grid_step);

  if (checkpoint_path.empty()) {
    throw UsageError("missing required key: paths.checkpoint (--checkpoint)");
  }
  if (embeddings_path.empty()) {
    throw UsageError("missing required key: paths.embeddings (--embeddings)");
  }
  if (annotations_path.empty()) {
    throw UsageError("missing required key: paths.annotations (--annotations)");
  }
  if (!(grid_step > 0.0 && grid_step <= 1.0)) {
    throw UsageError("--grid-step must be in (0, 1]");
  }

  const vattr::Checkpoint ckpt = vattr::load_checkpoint(checkpoint_path);
  const vattr::Model model = ckpt.model();
  vattr::AblationMode mode = ckpt.config.mode;
  if (app->get_option("--mode")->count() > 0 || table.contains("eval.mode")) {
    fallback(app->get_option("--mode"), table, "eval.mode", mode_name);
    mode = parse_mode(mode_name);
  }

  const vattr::EmbeddingStore store = vattr::load_embeddings(embeddings_path);
  const auto tuples = vattr::parse_annotations(annotations_path, model.vocab);
  vattr::validate_corpus(store, tuples);

  std::vector<std::string> warnings;
  const vattr::ReferenceTable references =
      vattr::build_reference_table(tuples, store, vattr::identity_verifier(),
                                   &warnings);
  for (const std::string& w : warnings) {
    std::fprintf(stderr, "warning: %s\n", w.c_str());
  }

  std::vector<double> grid;
  for (int i = 0; static_cast<double>(i) * grid_step <= 1.0 + 1e-9; ++i) {
    grid.push_back(std::min(static_cast<double>(i) * grid_step, 1.0));
  }

  std::vector<vattr::EditSource> sources;
  for (const vattr::SpeakerRecord& rec : store.speakers()) {
    sources.push_back(vattr::EditSource{rec.speaker_id, rec.gender,
                                        store.mean_embedding(rec.speaker_id)});
  }

  // descriptors that have references for at least one gender
  std::vector<int> descriptors;
  for (int x = 0; x < model.vocab.size(); ++x) {
    if (references.find(vattr::Gender::F, x) ||
        references.find(vattr::Gender::M, x)) {
      descriptors.push_back(x);
    }
  }
  if (descriptors.empty()) {
    throw vattr::DataError("no descriptor has reference speakers");
  }

  vattr::TvasReport report;
  report.rows.resize(descriptors.size());
  parallel_for(descriptors.size(), common.jobs, [&](std::size_t i) {
    const int x = descriptors[i];
    std::vector<vattr::EditSource> usable;
    for (const vattr::EditSource& src : sources) {
      if (references.find(src.gender, x)) usable.push_back(src);
    }
    report.rows[i] =
        vattr::tvas_curve(model, usable, x, grid, mode, references);
  });

  fs::create_directories(common.output_dir);
  const fs::path csv_path = fs::path(common.output_dir) / "tvas.csv";
  vattr::export_report(report, model.vocab, csv_path);
  const fs::path dump_path = fs::path(common.output_dir) / "embeddings.jsonl";
  vattr::export_embedding_dump(model, sources, descriptors, grid, mode,
                               dump_path);

  json effective;
  effective["paths"] = {{"checkpoint", checkpoint_path},
                        {"embeddings", embeddings_path},
                        {"annotations", annotations_path}};
  effective["eval"] = {{"grid_step", grid_step},
                       {"mode", vattr::to_string(mode)},
                       {"jobs", common.jobs}};
  write_manifest(common, "eval", effective);

  for (std::size_t i = 0; i < report.rows.size(); ++i) {
    std::printf("%-12s TVAS % .6f\n",
                model.vocab.name(report.rows[i].descriptor).c_str(),
                report.rows[i].tvas);
  }
  std::printf("report: %s\nembedding dump: %s\n", csv_path.string().c_str(),
              dump_path.string().c_str());
  return 0;
}

// --- stats --------------------------------------------------------------------

int cmd_stats(const CommonOpts& common, const CLI::App* app,
              std::string annotations_path, std::string vocab_path) {
  const auto table = load_config(common);
  fallback(app->get_option("--annotations"), table, "paths.annotations",
           annotations_path);
  fallback(app->get_option("--vocab"), table, "paths.vocab", vocab_path);
  if (annotations_path.empty()) {
    throw UsageError("missing required key: paths.annotations (--annotations)");
  }

  const vattr::DescriptorVocab vocab = load_vocab(vocab_path);
  const auto tuples = vattr::parse_annotations(annotations_path, vocab);
  const vattr::StatsReport report = vattr::dataset_stats(tuples, vocab);

  std::printf("%zu tuples\n", report.tuple_count);
  std::printf("descriptor occurrences:\n");
  for (int x = 0; x < vocab.size(); ++x) {
    std::printf("  %-12s %6zu  %6.2f%%\n", vocab.name(x).c_str(),
                report.descriptor_counts[static_cast<std::size_t>(x)],
                report.descriptor_freq_pct[static_cast<std::size_t>(x)]);
  }
  std::printf("tuples with 1/2/3 descriptors: %.2f%% / %.2f%% / %.2f%%\n",
              report.one_descriptor_pct, report.two_descriptor_pct,
              report.three_descriptor_pct);
  std::printf("Similar: %.2f%%\n", report.similar_pct);

  json effective;
  effective["paths"] = {{"annotations", annotations_path},
                        {"vocab", vocab_path}};
  write_manifest(common, "stats", effective);
  return 0;
}

// --- synth --------------------------------------------------------------------

int cmd_synth(const CommonOpts& common, const CLI::App* app,
              vattr::SyntheticSpec spec) {
  const auto table = load_config(common);
  fallback(app->get_option("--speakers-per-gender"), table,
           "synth.speakers_per_gender", spec.speakers_per_gender);
  fallback(app->get_option("--vocab-size"), table, "synth.vocab_size",
           spec.vocab_size);
  fallback(app->get_option("--dim"), table, "synth.dim", spec.dim);
  fallback(app->get_option("--utterances"), table,
           "synth.utterances_per_speaker", spec.utterances_per_speaker);
  fallback(app->get_option("--noise"), table, "synth.noise_scale",
           spec.noise_scale);
  fallback(app->get_option("--threshold"), table, "synth.threshold",
           spec.threshold);
  fallback(app->get_option("--seed"), table, "synth.seed", spec.seed);

  const vattr::SyntheticCorpus corpus = vattr::generate_synthetic(spec);
  fs::create_directories(common.output_dir);
  const fs::path dir(common.output_dir);
  vattr::save_embeddings(corpus.store, dir / "embeddings.jsonl");
  vattr::save_annotations(corpus.tuples, corpus.vocab, dir / "annotations.tsv");
  vattr::save_ground_truth(corpus.truth, dir / "ground_truth.json");
  {
    std::ofstream out(dir / "vocab.txt");
    if (!out) throw vattr::DataError("cannot write vocab.txt");
    for (const std::string& name : corpus.vocab.names()) out << name << '\n';
  }

  json effective;
  effective["synth"] = {{"speakers_per_gender", spec.speakers_per_gender},
                        {"vocab_size", spec.vocab_size},
                        {"dim", spec.dim},
                        {"utterances_per_speaker", spec.utterances_per_speaker},
                        {"noise_scale", spec.noise_scale},
                        {"threshold", spec.threshold},
                        {"seed", spec.seed}};
  write_manifest(common, "synth", effective);

  std::printf("synthetic corpus: %zu speakers, %zu tuples -> %s\n",
              corpus.store.speaker_count(), corpus.tuples.size(),
              common.output_dir.c_str());
  return 0;
}

// --- gradcheck ------------------------------------------------------------------

int cmd_gradcheck(const CommonOpts& common, const CLI::App* app,
                  vattr::GradCertConfig config) {
  const auto table = load_config(common);
  fallback(app->get_option("--configs"), table, "gradcheck.configs",
           config.num_configs);
  fallback(app->get_option("--seed"), table, "gradcheck.seed", config.seed);
  fallback(app->get_option("--tolerance"), table, "gradcheck.tolerance",
           config.tolerance);
  fallback(app->get_option("--step"), table, "gradcheck.h", config.h);

  const vattr::GradCertResult result =
      vattr::certify_training_gradients(config);

  // worst relative error per block across configs
  std::map<std::string, double> worst;
  for (const vattr::GradReport& report : result.reports) {
    for (const auto& block : report.blocks) {
      worst[block.name] = std::max(worst[block.name], block.max_rel_err);
    }
  }
  for (const auto& [name, err] : worst) {
    std::printf("  %-24s max rel err %.3e\n", name.c_str(), err);
  }
  std::printf("%s: max relative error %.3e over %d configs (tolerance %.1e)\n",
              result.pass ? "PASS" : "FAIL", result.max_rel_err,
              config.num_configs, config.tolerance);

  json effective;
  effective["gradcheck"] = {{"configs", config.num_configs},
                            {"seed", config.seed},
                            {"tolerance", config.tolerance},
                            {"h", config.h}};
  write_manifest(common, "gradcheck", effective);
  return result.pass ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"voice attribute editing toolkit"};
  app.require_subcommand(1);
  app.fallthrough();  // global options are accepted after the subcommand too

  CommonOpts common;
  app.add_option("--config", common.config_path, "TOML config file")
      ->envname("VATTR_CONFIG");
  app.add_option("--output-dir", common.output_dir,
                 "directory for outputs and run manifests");
  app.add_option("--jobs", common.jobs, "worker threads for sweeps");

  // train
  auto* train = app.add_subcommand("train", "train a model");
  std::string tr_embeddings, tr_annotations, tr_vocab, tr_checkpoint,
      tr_resume;
  vattr::TrainConfig tr_config;
  std::string tr_mode = "full";
  train->add_option("--embeddings", tr_embeddings, "embedding JSONL file");
  train->add_option("--annotations", tr_annotations, "annotation TSV file");
  train->add_option("--vocab", tr_vocab, "vocabulary file (default built-in)");
  train->add_option("--checkpoint", tr_checkpoint, "output checkpoint path");
  train->add_option("--resume", tr_resume,
                    "checkpoint to resume from (model and optimizer settings "
                    "come from the checkpoint; --steps sets the new target)");
  train->add_option("--steps", tr_config.steps, "optimizer steps");
  train->add_option("--batch-size", tr_config.batch_size, "batch size");
  train->add_option("--seed", tr_config.seed, "RNG seed");
  train->add_option("--lr", tr_config.adamw.lr, "learning rate");
  train->add_option("--beta1", tr_config.adamw.beta1, "AdamW beta1");
  train->add_option("--beta2", tr_config.adamw.beta2, "AdamW beta2");
  train->add_option("--weight-decay", tr_config.adamw.weight_decay,
                    "decoupled weight decay");
  train->add_option("--lambda-rec", tr_config.lambda_rec,
                    "reconstruction loss weight");
  train->add_option("--lambda-align", tr_config.lambda_align,
                    "alignment loss weight");
  train->add_option("--tau", tr_config.softmax_scale, "readout temperature");
  train->add_option("--main-slots", tr_config.main_slots, "main slots M");
  train->add_option("--residual-slots", tr_config.residual_slots,
                    "residual slots N");
  train->add_option("--hidden", tr_config.hidden,
                    "degree head width (0 = D)");
  train->add_option("--mode", tr_mode,
                    "full|no_voice_res|no_resmem|no_vadp");

  // edit
  auto* edit = app.add_subcommand("edit", "edit a speaker embedding");
  std::string ed_checkpoint, ed_embeddings, ed_speaker, ed_utterance,
      ed_prompt, ed_mode = "full", ed_backend = "lexical", ed_out;
  double ed_alpha = 0.7;
  vattr::LlmConfig ed_llm;
  edit->add_option("--checkpoint", ed_checkpoint, "trained checkpoint");
  edit->add_option("--embeddings", ed_embeddings, "embedding JSONL file");
  edit->add_option("--speaker", ed_speaker, "source speaker id")->required();
  edit->add_option("--utterance", ed_utterance,
                   "edit one utterance instead of the speaker mean");
  edit->add_option("--prompt", ed_prompt, "text prompt")->required();
  edit->add_option("--alpha", ed_alpha, "editing degree in [0,1]");
  edit->add_option("--mode", ed_mode, "override the checkpoint's mode");
  edit->add_option("--backend", ed_backend, "lexical|llm");
  edit->add_option("--out", ed_out, "edited embedding output file");
  edit->add_option("--llm-base-url", ed_llm.base_url,
                   "chat-completion endpoint, e.g. http://host:port");
  edit->add_option("--llm-model", ed_llm.model, "model name");
  edit->add_option("--llm-path", ed_llm.path, "endpoint path");

  // eval
  auto* eval = app.add_subcommand("eval", "TVAS sweep over descriptors");
  std::string ev_checkpoint, ev_embeddings, ev_annotations,
      ev_mode = "full";
  double ev_grid_step = 0.1;
  eval->add_option("--checkpoint", ev_checkpoint, "trained checkpoint");
  eval->add_option("--embeddings", ev_embeddings, "embedding JSONL file");
  eval->add_option("--annotations", ev_annotations, "annotation TSV file");
  eval->add_option("--grid-step", ev_grid_step, "alpha grid step");
  eval->add_option("--mode", ev_mode, "override the checkpoint's mode");

  // stats
  auto* stats = app.add_subcommand("stats", "annotation corpus statistics");
  std::string st_annotations, st_vocab;
  stats->add_option("--annotations", st_annotations, "annotation TSV file");
  stats->add_option("--vocab", st_vocab, "vocabulary file (default built-in)");

  // synth
  auto* synth = app.add_subcommand("synth", "generate a synthetic corpus");
  vattr::SyntheticSpec sy_spec;
  synth->add_option("--speakers-per-gender", sy_spec.speakers_per_gender,
                    "speakers per gender");
  synth->add_option("--vocab-size", sy_spec.vocab_size, "attribute count");
  synth->add_option("--dim", sy_spec.dim, "embedding dimension");
  synth->add_option("--utterances", sy_spec.utterances_per_speaker,
                    "utterances per speaker");
  synth->add_option("--noise", sy_spec.noise_scale, "utterance noise scale");
  synth->add_option("--threshold", sy_spec.threshold,
                    "annotation coefficient gap");
  synth->add_option("--seed", sy_spec.seed, "RNG seed");

  // gradcheck
  auto* gradcheck =
      app.add_subcommand("gradcheck", "certify gradients vs finite differences");
  vattr::GradCertConfig gc_config;
  gradcheck->add_option("--configs", gc_config.num_configs,
                        "number of random configs");
  gradcheck->add_option("--seed", gc_config.seed, "RNG seed");
  gradcheck->add_option("--tolerance", gc_config.tolerance,
                        "max relative error");
  gradcheck->add_option("--step", gc_config.h, "finite-difference step");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (train->parsed()) {
      return cmd_train(common, train, tr_embeddings, tr_annotations, tr_vocab,
                       tr_checkpoint, tr_resume, tr_config, tr_mode);
    }
    if (edit->parsed()) {
      return cmd_edit(common, edit, ed_checkpoint, ed_embeddings, ed_speaker,
                      ed_utterance, ed_prompt, ed_alpha, ed_mode, ed_backend,
                      ed_out, ed_llm);
    }
    if (eval->parsed()) {
      return cmd_eval(common, eval, ev_checkpoint, ev_embeddings,
                      ev_annotations, ev_grid_step, ev_mode);
    }
    if (stats->parsed()) {
      return cmd_stats(common, stats, st_annotations, st_vocab);
    }
    if (synth->parsed()) {
      return cmd_synth(common, synth, sy_spec);
    }
    if (gradcheck->parsed()) {
      return cmd_gradcheck(common, gradcheck, gc_config);
    }
  } catch (const UsageError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const vattr::NumericError& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return 3;
  } catch (const vattr::DataError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 1;
}
