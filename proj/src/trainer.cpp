// SPDX-License-Identifier: Apache-2.0
#include "vattr/trainer.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

namespace vattr {

void TrainConfig::validate() const {
  if (lambda_rec < 0 || lambda_align < 0) {
    throw std::invalid_argument("loss weights must be >= 0");
  }
  if (!(adamw.beta1 > 0 && adamw.beta1 < 1 && adamw.beta2 > 0 &&
        adamw.beta2 < 1)) {
    throw std::invalid_argument("AdamW betas must be in (0,1)");
  }
  if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
  if (steps < 0) throw std::invalid_argument("steps must be >= 0");
  if (!(softmax_scale > 0)) {
    throw std::invalid_argument("softmax_scale must be positive");
  }
  if (main_slots < 1 || residual_slots < 1) {
    throw std::invalid_argument("slot counts must be >= 1");
  }
  if (hidden < 0) throw std::invalid_argument("hidden must be >= 0");
}

void validate_corpus(const EmbeddingStore& store,
                     const std::vector<AnnotationTuple>& tuples) {
  for (const AnnotationTuple& t : tuples) {
    const SpeakerRecord& a = store.at(t.speaker_a);
    const SpeakerRecord& b = store.at(t.speaker_b);
    if (a.gender != b.gender) {
      throw DataError("annotated pair crosses gender: " + t.speaker_a + " / " +
                      t.speaker_b);
    }
  }
}

namespace {

struct ParamNodes {
  Tape::Id main_values = -1, residual_values = -1, descriptor_keys = -1;
  Tape::Id table = -1, weight = -1, bias = -1;
  Tape::Id w_hidden = -1, b_hidden = -1, w_mean = -1, b_mean = -1;
  Tape::Id w_logvar = -1, b_logvar = -1;
};

Tape::Id as_param(Tape& tape, std::vector<double>& value,
                  std::vector<double>& grad) {
  return tape.param(std::span<const double>(value), std::span<double>(grad));
}

}  // namespace

std::vector<AlignTargets> compute_align_targets(
    const ResMemParams& resmem, std::span<const BatchItem> batch) {
  std::vector<AlignTargets> targets;
  targets.reserve(batch.size());
  for (const BatchItem& item : batch) {
    AlignTargets t;
    t.source_weights = readout_main(resmem, *item.speaker_a).weights;
    t.target_weights = readout_main(resmem, *item.speaker_b).weights;
    targets.push_back(std::move(t));
  }
  return targets;
}

TrainingGraph build_training_loss(Tape& tape, ModelParams& params,
                                  ModelGrads& grads, const TrainConfig& config,
                                  std::span<const BatchItem> batch,
                                  std::span<const double> eps_draws,
                                  std::span<const AlignTargets> targets) {
  if (batch.empty()) throw std::invalid_argument("empty batch");
  const bool uses_vadp = config.mode == AblationMode::kFull ||
                         config.mode == AblationMode::kNoVoiceRes;
  if (uses_vadp && eps_draws.size() != batch.size()) {
    throw std::invalid_argument("need one eps draw per batch item");
  }
  if (config.mode != AblationMode::kNoResMem &&
      targets.size() != batch.size()) {
    throw std::invalid_argument("need alignment targets per batch item");
  }

  const int dim = params.resmem.dim;
  const int main_slots = params.resmem.main_slots;
  const int residual_slots = params.resmem.residual_slots;
  const int hidden = params.vadp.hidden;
  const double tau = params.resmem.softmax_scale;

  ParamNodes np;
  np.table = as_param(tape, params.encoder.table, grads.table);
  np.weight = as_param(tape, params.encoder.weight, grads.weight);
  np.bias = as_param(tape, params.encoder.bias, grads.bias);
  if (config.mode != AblationMode::kNoResMem) {
    np.main_values = as_param(tape, params.resmem.main_values, grads.main_values);
    np.descriptor_keys =
        as_param(tape, params.resmem.descriptor_keys, grads.descriptor_keys);
    if (config.mode != AblationMode::kNoVoiceRes) {
      np.residual_values =
          as_param(tape, params.resmem.residual_values, grads.residual_values);
    }
  }
  if (uses_vadp) {
    np.w_hidden = as_param(tape, params.vadp.w_hidden, grads.w_hidden);
    np.b_hidden = as_param(tape, params.vadp.b_hidden, grads.b_hidden);
    np.w_mean = as_param(tape, params.vadp.w_mean, grads.w_mean);
    np.b_mean = as_param(tape, params.vadp.b_mean, grads.b_mean);
    np.w_logvar = as_param(tape, params.vadp.w_logvar, grads.w_logvar);
    np.b_logvar = as_param(tape, params.vadp.b_logvar, grads.b_logvar);
  }

  const auto encode = [&](int descriptor) {
    const Tape::Id raw = tape.row(np.table, descriptor, dim);
    return tape.relu(tape.matvec_bias(np.weight, dim, dim, raw, np.bias));
  };

  // weights and recalled main/residual embeddings of one speaker embedding
  struct SpeakerNodes {
    Tape::Id weights, recalled_main, recalled, residual;
  };
  const auto read_speaker = [&](Tape::Id s) {
    SpeakerNodes out{};
    const Tape::Id cos =
        tape.slot_cosines(np.main_values, main_slots, dim, s);
    out.weights = tape.scaled_softmax(cos, tau);
    out.recalled_main =
        tape.weighted_sum(np.main_values, main_slots, dim, out.weights);
    if (config.mode == AblationMode::kNoVoiceRes) {
      out.recalled = out.recalled_main;
      out.residual = -1;
    } else {
      const Tape::Id rcos =
          tape.slot_cosines(np.residual_values, residual_slots, dim, s);
      const Tape::Id rw = tape.scaled_softmax(rcos, tau);
      out.residual =
          tape.weighted_sum(np.residual_values, residual_slots, dim, rw);
      out.recalled = tape.add(out.recalled_main, out.residual);
    }
    return out;
  };

  Tape::Id rec_sum = -1;
  Tape::Id align_sum = -1;
  const auto accumulate = [&tape](Tape::Id& sum, Tape::Id term) {
    sum = sum < 0 ? term : tape.add(sum, term);
  };

  for (std::size_t i = 0; i < batch.size(); ++i) {
    const BatchItem& item = batch[i];
    const Tape::Id s_a = tape.constant(*item.speaker_a);
    const Tape::Id s_b = tape.constant(*item.speaker_b);
    const Tape::Id t = encode(item.descriptor);

    if (config.mode == AblationMode::kNoResMem) {
      // baseline: pull s_a + t toward s_b on the raw embeddings
      accumulate(rec_sum, tape.sq_l2_diff(tape.add(s_a, t), s_b));
      continue;
    }

    const SpeakerNodes a = read_speaker(s_a);
    const SpeakerNodes b = read_speaker(s_b);

    // reconstruction, averaged over the two speech segments
    Tape::Id rec_a, rec_b;
    if (config.mode == AblationMode::kNoVoiceRes) {
      rec_a = tape.sq_l2_diff(s_a, a.recalled_main);
      rec_b = tape.sq_l2_diff(s_b, b.recalled_main);
    } else {
      rec_a = tape.add(tape.sq_l2_diff(s_a, a.recalled),
                       tape.sq_l2_diff(s_a, a.recalled_main));
      rec_b = tape.add(tape.sq_l2_diff(s_b, b.recalled),
                       tape.sq_l2_diff(s_b, b.recalled_main));
    }
    accumulate(rec_sum, tape.scale(tape.add(rec_a, rec_b), 0.5));

    // alignment between the target's slot weights and the edited mixture
    const Tape::Id w_a_data = tape.constant(targets[i].source_weights);
    const Tape::Id w_b_data = tape.constant(targets[i].target_weights);
    const Tape::Id cos_t =
        tape.slot_cosines(np.descriptor_keys, main_slots, dim, t);
    const Tape::Id w_t = tape.scaled_softmax(cos_t, tau);

    Tape::Id mixture;
    if (config.mode == AblationMode::kNoVadp) {
      // fixed mixture; normalized by 1/2 so it stays a distribution
      mixture = tape.mix_const(0.5, w_t, w_a_data);
    } else {
      const Tape::Id input = tape.concat3(s_a, s_b, t);
      const Tape::Id hid = tape.relu(
          tape.matvec_bias(np.w_hidden, hidden, 3 * dim, input, np.b_hidden));
      const Tape::Id mu = tape.matvec_bias(np.w_mean, 1, hidden, hid, np.b_mean);
      const Tape::Id logvar =
          tape.matvec_bias(np.w_logvar, 1, hidden, hid, np.b_logvar);
      const Tape::Id alpha =
          tape.sigmoid(tape.reparam(mu, logvar, eps_draws[i]));
      mixture = tape.mix(alpha, w_t, w_a_data);
    }
    accumulate(align_sum, tape.kl_div(w_b_data, mixture));
  }

  const double inv_batch = 1.0 / static_cast<double>(batch.size());
  TrainingGraph g;
  g.rec = tape.scale(rec_sum, inv_batch);
  if (align_sum >= 0) {
    g.align = tape.scale(align_sum, inv_batch);
    g.total = tape.add_scaled(g.rec, config.lambda_rec, g.align,
                              config.lambda_align);
  } else {
    g.total = tape.scale(g.rec, config.lambda_rec);
  }
  return g;
}

Trainer::Trainer(const TrainConfig& config, const DescriptorVocab& vocab,
                 const EmbeddingStore& store,
                 std::vector<AnnotationTuple> tuples)
    : config_(config),
      vocab_(vocab),
      store_(&store),
      tuples_(std::move(tuples)),
      rng_(config.seed) {
  config_.validate();
  validate_corpus(store, tuples_);
  const int dim = store.dim();
  const int hidden = config_.hidden > 0 ? config_.hidden : dim;
  config_.hidden = hidden;

  auto [resmem, encoder] =
      init_params(config_.main_slots, config_.residual_slots, dim,
                  vocab_.size(), rng_);
  resmem.softmax_scale = config_.softmax_scale;
  params_.resmem = std::move(resmem);
  params_.encoder = std::move(encoder);
  params_.vadp = init_vadp(dim, hidden, rng_);
  grads_.resize_like(params_);

  for (const ParamBlockRef& block : bind_blocks(params_, grads_)) {
    moments_[block.name].resize(block.value->size());
  }
}

Trainer::Trainer(const Checkpoint& checkpoint, const EmbeddingStore& store,
                 std::vector<AnnotationTuple> tuples)
    : config_(checkpoint.config),
      vocab_(checkpoint.vocab),
      store_(&store),
      tuples_(std::move(tuples)),
      params_(checkpoint.params),
      moments_(checkpoint.moments),
      rng_(0),
      step_(checkpoint.step),
      history_(checkpoint.history) {
  config_.validate();
  validate_corpus(store, tuples_);
  if (store.dim() != params_.resmem.dim) {
    throw DataError("checkpoint dimension " +
                    std::to_string(params_.resmem.dim) +
                    " does not match store dimension " +
                    std::to_string(store.dim()));
  }
  grads_.resize_like(params_);
  rng_.load_state(checkpoint.rng_state);
}

LossBreakdown Trainer::step() {
  const std::vector<BatchItem> batch = sample_training_batch(
      *store_, tuples_, static_cast<std::size_t>(config_.batch_size), rng_);
  std::vector<double> eps;
  if (config_.mode == AblationMode::kFull ||
      config_.mode == AblationMode::kNoVoiceRes) {
    eps.resize(batch.size());
    for (double& e : eps) e = rng_.normal();
  }

  std::vector<AlignTargets> targets;
  if (config_.mode != AblationMode::kNoResMem) {
    targets = compute_align_targets(params_.resmem, batch);
  }

  grads_.zero();
  Tape tape;
  TrainingGraph graph;
  try {
    graph = build_training_loss(tape, params_, grads_, config_, batch, eps,
                                targets);
    tape.backward(graph.total);
  } catch (const NumericError& e) {
    throw NumericError("training step " + std::to_string(step_ + 1) +
                       " aborted: " + e.what());
  }

  LossBreakdown bd;
  bd.rec = tape.value_scalar(graph.rec);
  bd.align = graph.align >= 0 ? tape.value_scalar(graph.align) : 0.0;
  bd.total = tape.value_scalar(graph.total);

  ++step_;
  const auto blocks = bind_blocks(params_, grads_);
  for (const std::string& name : trainable_block_names(config_.mode)) {
    for (const ParamBlockRef& block : blocks) {
      if (block.name == name) {
        adamw_step(*block.value, *block.grad, moments_.at(name), step_,
                   config_.adamw);
        break;
      }
    }
  }
  check_slot_norms(params_.resmem);
  history_.push_back(LossRow{step_, bd.total, bd.rec, bd.align});
  return bd;
}

Checkpoint Trainer::make_checkpoint() const {
  Checkpoint ckpt;
  ckpt.config = config_;
  ckpt.vocab = vocab_;
  ckpt.params = params_;
  ckpt.moments = moments_;
  ckpt.step = step_;
  ckpt.history = history_;
  ckpt.rng_state = rng_.save_state();
  return ckpt;
}

namespace {

Checkpoint run_to(Trainer& trainer, long long total_steps,
                  const EmbeddingStore& store) {
  const std::uint64_t before = store.content_hash();
  while (trainer.current_step() < total_steps) {
    trainer.step();
  }
  if (store.content_hash() != before) {
    throw NumericError("frozen-input contract violated: store changed");
  }
  return trainer.make_checkpoint();
}

// Straight-line re-implementation of the training objective in extended
// precision, independent of the tape. It serves as the finite-difference
// oracle: the difference quotient needs more headroom than double rounding
// leaves at the lambda-scaled loss magnitudes, and an independent forward
// path makes the certification stronger than checking the tape against its
// own forward values.
long double training_loss_xp(const ModelParams& params,
                             const TrainConfig& config,
                             std::span<const BatchItem> batch,
                             std::span<const double> eps_draws,
                             std::span<const AlignTargets> targets) {
  using xp = long double;
  const int dim = params.resmem.dim;
  const auto d = static_cast<std::size_t>(dim);
  const xp tau = params.resmem.softmax_scale;
  constexpr xp guard = kNormEpsilon;
  constexpr xp clamp = 1e-12L;

  const auto weights_of = [&](const std::vector<double>& keys, int nslots,
                              const std::vector<xp>& q) {
    xp nq = 0;
    for (xp x : q) nq += x * x;
    nq = sqrtl(nq);
    std::vector<xp> w(static_cast<std::size_t>(nslots));
    for (int i = 0; i < nslots; ++i) {
      const double* slot = keys.data() + static_cast<std::size_t>(i) * d;
      xp u = 0, nm = 0;
      for (std::size_t c = 0; c < d; ++c) {
        u += q[c] * static_cast<xp>(slot[c]);
        nm += static_cast<xp>(slot[c]) * static_cast<xp>(slot[c]);
      }
      w[static_cast<std::size_t>(i)] = u / ((nq + guard) * (sqrtl(nm) + guard));
    }
    xp hi = w[0] * tau;
    for (xp& x : w) {
      x *= tau;
      hi = std::max(hi, x);
    }
    xp sum = 0;
    for (xp& x : w) {
      x = expl(x - hi);
      sum += x;
    }
    for (xp& x : w) x /= sum;
    return w;
  };
  const auto recall_of = [&](const std::vector<double>& values, int nslots,
                             const std::vector<xp>& w) {
    std::vector<xp> out(d, 0.0L);
    for (int i = 0; i < nslots; ++i) {
      const double* slot = values.data() + static_cast<std::size_t>(i) * d;
      for (std::size_t c = 0; c < d; ++c) {
        out[c] += w[static_cast<std::size_t>(i)] * static_cast<xp>(slot[c]);
      }
    }
    return out;
  };
  const auto to_xp = [](std::span<const double> v) {
    return std::vector<xp>(v.begin(), v.end());
  };
  const auto sq_diff = [](const std::vector<xp>& a, const std::vector<xp>& b) {
    xp acc = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      const xp diff = a[i] - b[i];
      acc += diff * diff;
    }
    return acc;
  };

  xp rec_sum = 0, align_sum = 0;
  bool has_align = false;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const std::vector<xp> sa = to_xp(*batch[i].speaker_a);
    const std::vector<xp> sb = to_xp(*batch[i].speaker_b);

    // descriptor encoder
    std::vector<xp> t(d);
    const double* row = params.encoder.table.data() +
                        static_cast<std::size_t>(batch[i].descriptor) * d;
    for (std::size_t r = 0; r < d; ++r) {
      xp acc = params.encoder.bias[r];
      for (std::size_t c = 0; c < d; ++c) {
        acc += static_cast<xp>(params.encoder.weight[r * d + c]) *
               static_cast<xp>(row[c]);
      }
      t[r] = acc > 0 ? acc : 0;
    }

    if (config.mode == AblationMode::kNoResMem) {
      std::vector<xp> moved(d);
      for (std::size_t c = 0; c < d; ++c) moved[c] = sa[c] + t[c];
      rec_sum += sq_diff(moved, sb);
      continue;
    }

    const int m = params.resmem.main_slots;
    const int n = params.resmem.residual_slots;
    const auto recall_pair = [&](const std::vector<xp>& s) {
      const std::vector<xp> w = weights_of(params.resmem.main_values, m, s);
      std::vector<xp> main = recall_of(params.resmem.main_values, m, w);
      if (config.mode == AblationMode::kNoVoiceRes) {
        return sq_diff(s, main);
      }
      const std::vector<xp> wr =
          weights_of(params.resmem.residual_values, n, s);
      const std::vector<xp> res =
          recall_of(params.resmem.residual_values, n, wr);
      std::vector<xp> combined(d);
      for (std::size_t c = 0; c < d; ++c) combined[c] = main[c] + res[c];
      return sq_diff(s, combined) + sq_diff(s, main);
    };
    rec_sum += 0.5L * (recall_pair(sa) + recall_pair(sb));

    const std::vector<xp> w_t =
        weights_of(params.resmem.descriptor_keys, m, t);
    xp alpha = 0.5L;
    if (config.mode != AblationMode::kNoVadp) {
      const auto h = static_cast<std::size_t>(params.vadp.hidden);
      std::vector<xp> input;
      input.reserve(3 * d);
      input.insert(input.end(), sa.begin(), sa.end());
      input.insert(input.end(), sb.begin(), sb.end());
      input.insert(input.end(), t.begin(), t.end());
      std::vector<xp> hidden(h);
      for (std::size_t r = 0; r < h; ++r) {
        xp acc = params.vadp.b_hidden[r];
        for (std::size_t c = 0; c < 3 * d; ++c) {
          acc += static_cast<xp>(params.vadp.w_hidden[r * 3 * d + c]) *
                 input[c];
        }
        hidden[r] = acc > 0 ? acc : 0;
      }
      xp mu = params.vadp.b_mean[0];
      xp logvar = params.vadp.b_logvar[0];
      for (std::size_t r = 0; r < h; ++r) {
        mu += static_cast<xp>(params.vadp.w_mean[r]) * hidden[r];
        logvar += static_cast<xp>(params.vadp.w_logvar[r]) * hidden[r];
      }
      const xp z = mu + expl(0.5L * logvar) * static_cast<xp>(eps_draws[i]);
      alpha = z >= 0 ? 1.0L / (1.0L + expl(-z)) : expl(z) / (1.0L + expl(z));
    }

    xp kl = 0;
    for (std::size_t s = 0; s < w_t.size(); ++s) {
      const xp p =
          std::max(static_cast<xp>(targets[i].target_weights[s]), clamp);
      const xp q = std::max(
          alpha * w_t[s] +
              (1.0L - alpha) *
                  static_cast<xp>(targets[i].source_weights[s]),
          clamp);
      kl += p * (logl(p) - logl(q));
    }
    align_sum += kl;
    has_align = true;
  }

  const xp inv = 1.0L / static_cast<xp>(batch.size());
  const xp rec = rec_sum * inv;
  if (!has_align) {
    return static_cast<xp>(config.lambda_rec) * rec;
  }
  return static_cast<xp>(config.lambda_rec) * rec +
         static_cast<xp>(config.lambda_align) * (align_sum * inv);
}

}  // namespace

Checkpoint train(const TrainConfig& config, const DescriptorVocab& vocab,
                 const EmbeddingStore& store,
                 const std::vector<AnnotationTuple>& tuples) {
  Trainer trainer(config, vocab, store, tuples);
  return run_to(trainer, config.steps, store);
}

Checkpoint resume_train(const Checkpoint& checkpoint,
                        const EmbeddingStore& store,
                        const std::vector<AnnotationTuple>& tuples,
                        long long total_steps) {
  if (total_steps < checkpoint.step) {
    throw std::invalid_argument("resume target precedes checkpoint step");
  }
  // keep the final checkpoint identical to an uninterrupted run's
  Checkpoint target = checkpoint;
  target.config.steps = total_steps;
  Trainer trainer(target, store, tuples);
  return run_to(trainer, total_steps, store);
}

GradCertResult certify_training_gradients(const GradCertConfig& config) {
  GradCertResult result;
  for (int c = 0; c < config.num_configs; ++c) {
    Rng rng(config.seed + static_cast<std::uint64_t>(c));

    ModelParams params;
    auto [resmem, encoder] =
        init_params(config.main_slots, config.residual_slots, config.dim,
                    config.vocab_size, rng);
    // alternate readout temperatures so the scale path is covered too
    resmem.softmax_scale = (c % 2 == 0) ? 1.0 : 5.0;
    params.resmem = std::move(resmem);
    params.encoder = std::move(encoder);
    params.vadp = init_vadp(config.dim, config.hidden, rng);

    ModelGrads grads;
    grads.resize_like(params);

    // unit-norm case embeddings, matching the scale the trainer sees
    std::vector<Embedding> embeddings;
    std::vector<BatchItem> batch;
    std::vector<double> eps;
    embeddings.reserve(2 * static_cast<std::size_t>(config.batch_size));
    for (int i = 0; i < config.batch_size; ++i) {
      for (int side = 0; side < 2; ++side) {
        Embedding e(static_cast<std::size_t>(config.dim));
        double norm = 0;
        for (double& x : e) {
          x = rng.normal();
          norm += x * x;
        }
        norm = std::sqrt(norm);
        for (double& x : e) x /= norm;
        embeddings.push_back(std::move(e));
      }
      const int descriptor =
          static_cast<int>(rng.uniform_index(
              static_cast<std::size_t>(config.vocab_size)));
      batch.push_back(BatchItem{&embeddings[embeddings.size() - 2],
                                &embeddings[embeddings.size() - 1],
                                descriptor});
      eps.push_back(rng.normal());
    }

    TrainConfig tc;
    tc.mode = config.mode;
    tc.hidden = config.hidden;
    tc.main_slots = config.main_slots;
    tc.residual_slots = config.residual_slots;

    // alignment targets are supervision data: frozen at the base point so
    // the finite differences see the same function the tape differentiates
    std::vector<AlignTargets> targets;
    if (tc.mode != AblationMode::kNoResMem) {
      targets = compute_align_targets(params.resmem, batch);
    }

    grads.zero();
    Tape tape;
    const TrainingGraph graph =
        build_training_loss(tape, params, grads, tc, batch, eps, targets);
    tape.backward(graph.total);

    const auto loss = [&]() {
      return training_loss_xp(params, tc, batch, eps, targets);
    };

    std::vector<ParamBlockRef> blocks;
    for (ParamBlockRef& block : bind_blocks(params, grads)) {
      for (const std::string& name : trainable_block_names(config.mode)) {
        if (block.name == name) {
          blocks.push_back(block);
          break;
        }
      }
    }
    GradReport report =
        check_gradients(loss, blocks, config.h, config.tolerance);
    result.max_rel_err = std::max(result.max_rel_err, report.max_rel_err);
    result.reports.push_back(std::move(report));
  }
  result.pass = result.max_rel_err < config.tolerance;
  return result;
}

void write_loss_csv(const std::vector<LossRow>& history,
                    const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << "step,loss_total,loss_rec,loss_align\n";
  char buf[128];
  for (const LossRow& row : history) {
    std::snprintf(buf, sizeof(buf), "%lld,%.17g,%.17g,%.17g\n", row.step,
                  row.total, row.rec, row.align);
    out << buf;
  }
}

}  // namespace vattr
