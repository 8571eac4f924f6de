// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "vattr/dataset.hpp"

namespace vattr {

struct SyntheticSpec {
  int speakers_per_gender = 20;
  int vocab_size = 6;          // V, requires dim >= vocab_size
  int dim = 32;                // D
  int utterances_per_speaker = 3;
  double noise_scale = 0.05;
  double threshold = 0.2;      // coefficient gap that earns an annotation
  std::uint64_t seed = 1;
};

// Planted structure behind a synthetic corpus: orthonormal attribute
// directions, per-speaker attribute coefficients, a shared base vector.
// Every utterance is base + sum_x a[s][x]*direction[x] + noise. It doubles
// as the oracle for editing tests: held-out utterances can be resynthesized
// from it, and labels can be recomputed from the coefficients.
struct SyntheticGroundTruth {
  std::vector<Embedding> directions;                   // V rows, unit norm
  std::map<std::string, std::vector<double>> coefficients;  // speaker -> a[x]
  Embedding base;
  double noise_scale = 0;
  double threshold = 0;

  // base + sum_x a[x] * direction[x] for one speaker, no noise.
  Embedding clean_embedding(const std::string& speaker_id) const;
};

struct SyntheticCorpus {
  DescriptorVocab vocab;
  EmbeddingStore store;
  std::vector<AnnotationTuple> tuples;
  SyntheticGroundTruth truth;
};

// Deterministic for a fixed spec: every ordered same-gender pair is
// annotated with the up-to-3 descriptors whose coefficient gap
// a_B - a_A exceeds the threshold (largest gaps first), else "Similar".
SyntheticCorpus generate_synthetic(const SyntheticSpec& spec);

void save_ground_truth(const SyntheticGroundTruth& truth,
                       const std::filesystem::path& path);
SyntheticGroundTruth load_ground_truth(const std::filesystem::path& path);

}  // namespace vattr
