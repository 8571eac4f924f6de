// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <vector>

#include "vattr/adamw.hpp"
#include "vattr/dataset.hpp"
#include "vattr/model.hpp"
#include "vattr/tape.hpp"

namespace vattr {

struct TrainConfig {
  double lambda_rec = 20.0;    // weight on the reconstruction loss
  double lambda_align = 200.0; // weight on the slot-weight alignment loss
  AdamWConfig adamw;
  int batch_size = 32;
  long long steps = 1000;
  std::uint64_t seed = 1;
  double softmax_scale = 1.0;  // readout temperature
  int main_slots = 32;
  int residual_slots = 4;
  int hidden = 0;              // degree-head width; 0 means use D
  AblationMode mode = AblationMode::kFull;

  void validate() const;
};

struct LossBreakdown {
  double rec = 0;
  double align = 0;
  double total = 0;  // lambda_rec * rec + lambda_align * align, exactly
};

struct LossRow {
  long long step;
  double total, rec, align;
};

struct Checkpoint {
  TrainConfig config;
  DescriptorVocab vocab;
  ModelParams params;
  std::map<std::string, AdamWMoments> moments;
  long long step = 0;
  std::vector<LossRow> history;
  std::string rng_state;

  Model model() const { return Model{vocab, params}; }
};

// Nodes of interest in a built loss graph.
struct TrainingGraph {
  Tape::Id total = -1;
  Tape::Id rec = -1;    // batch-mean reconstruction term
  Tape::Id align = -1;  // batch-mean alignment term, -1 when the mode has none
};

// Slot-weight distributions of the two speech segments, entering the
// alignment loss as supervision data. The reconstruction loss alone anchors
// the voice-side geometry; the alignment loss trains the descriptor path
// and the degree head against these targets.
struct AlignTargets {
  std::vector<double> source_weights;  // main readout of speaker A
  std::vector<double> target_weights;  // main readout of speaker B
};

// One entry per batch item, from the current main voice-value memory.
std::vector<AlignTargets> compute_align_targets(
    const ResMemParams& resmem, std::span<const BatchItem> batch);

// Lays the restricted training objective for one batch onto the tape:
// total = lambda_rec * mean(rec_i) + lambda_align * mean(align_i). eps_draws
// supplies one standard-normal value per item in the modes that sample an
// editing degree; targets may be empty in the mode without an alignment
// term. Both may be empty when unused.
TrainingGraph build_training_loss(Tape& tape, ModelParams& params,
                                  ModelGrads& grads, const TrainConfig& config,
                                  std::span<const BatchItem> batch,
                                  std::span<const double> eps_draws,
                                  std::span<const AlignTargets> targets);

// Checks that every annotated speaker exists and that pairs are same-gender.
void validate_corpus(const EmbeddingStore& store,
                     const std::vector<AnnotationTuple>& tuples);

class Trainer {
 public:
  // Fresh initialization from a seed.
  Trainer(const TrainConfig& config, const DescriptorVocab& vocab,
          const EmbeddingStore& store, std::vector<AnnotationTuple> tuples);

  // Resume: restores parameters, optimizer moments, history and the RNG
  // stream, so the continued run is identical to an uninterrupted one.
  Trainer(const Checkpoint& checkpoint, const EmbeddingStore& store,
          std::vector<AnnotationTuple> tuples);

  LossBreakdown step();

  long long current_step() const { return step_; }
  const ModelParams& params() const { return params_; }
  const std::vector<LossRow>& history() const { return history_; }
  const TrainConfig& config() const { return config_; }
  Checkpoint make_checkpoint() const;

 private:
  TrainConfig config_;
  DescriptorVocab vocab_;
  const EmbeddingStore* store_;
  std::vector<AnnotationTuple> tuples_;
  ModelParams params_;
  ModelGrads grads_;
  std::map<std::string, AdamWMoments> moments_;
  Rng rng_;
  long long step_ = 0;
  std::vector<LossRow> history_;
};

// Runs config.steps optimizer steps and returns the final checkpoint. The
// store is a frozen input; a content checksum is asserted before and after.
Checkpoint train(const TrainConfig& config, const DescriptorVocab& vocab,
                 const EmbeddingStore& store,
                 const std::vector<AnnotationTuple>& tuples);

// Continues a checkpoint until total_steps steps have been taken.
Checkpoint resume_train(const Checkpoint& checkpoint,
                        const EmbeddingStore& store,
                        const std::vector<AnnotationTuple>& tuples,
                        long long total_steps);

// step,loss_total,loss_rec,loss_align
void write_loss_csv(const std::vector<LossRow>& history,
                    const std::filesystem::path& path);

// --- gradient certification ---------------------------------------------------

struct GradCertConfig {
  int num_configs = 20;       // independent random (params, batch) cases
  std::uint64_t seed = 12345;
  double h = 1e-5;            // central-difference step
  double tolerance = 1e-4;    // max relative error allowed
  int dim = 8;
  int main_slots = 4;
  int residual_slots = 2;
  int vocab_size = 3;
  int hidden = 8;
  int batch_size = 2;
  AblationMode mode = AblationMode::kFull;
};

struct GradCertResult {
  bool pass = false;
  double max_rel_err = 0;
  std::vector<GradReport> reports;  // one per random config
};

// Compares the tape's analytic gradients of the full training loss against
// central finite differences over every parameter block, on num_configs
// random tiny cases.
GradCertResult certify_training_gradients(const GradCertConfig& config);

}  // namespace vattr
