// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "vattr/dataset.hpp"
#include "vattr/editor.hpp"
#include "vattr/model.hpp"

namespace vattr {

// Maps a working-space embedding into the space used for similarity scoring.
// The default is the identity; a real speaker-verification frontend can be
// plugged in here without touching the metric arithmetic.
using VerifierFn = std::function<Embedding(const Embedding&)>;

VerifierFn identity_verifier();

struct ReferenceEntry {
  std::string speaker_id;
  int occurrences = 0;     // times the speaker appears as SpeakerB for x
  double weight = 0;       // occurrences / total occurrences of x
  Embedding mean_embedding;  // mean verifier embedding over utterances
};

// Per (gender, descriptor): the reference speakers and their weights.
class ReferenceTable {
 public:
  using Key = std::pair<Gender, int>;

  const std::vector<ReferenceEntry>* find(Gender gender, int descriptor) const;
  const std::vector<ReferenceEntry>& at(Gender gender, int descriptor) const;
  std::map<Key, std::vector<ReferenceEntry>>& entries() { return entries_; }
  const std::map<Key, std::vector<ReferenceEntry>>& entries() const {
    return entries_;
  }

 private:
  std::map<Key, std::vector<ReferenceEntry>> entries_;
};

// Counts SpeakerB occurrences per (gender, descriptor) over the tuples;
// descriptors that never occur for a gender are omitted and reported in
// `warnings`.
ReferenceTable build_reference_table(
    const std::vector<AnnotationTuple>& tuples, const EmbeddingStore& store,
    const VerifierFn& verifier = identity_verifier(),
    std::vector<std::string>* warnings = nullptr);

// Reference-weighted cosine similarity of one embedding.
double atvas(std::span<const double> embedding,
             const std::vector<ReferenceEntry>& references,
             const VerifierFn& verifier = identity_verifier());

struct EditSource {
  std::string speaker_id;
  Gender gender = Gender::F;
  Embedding embedding;
};

struct TvasRow {
  int descriptor = -1;
  std::vector<double> grid;
  std::vector<double> atvas_by_alpha;  // averaged over sources
  std::vector<double> tvas_by_alpha;   // atvas_by_alpha - atvas at alpha 0
  double tvas = 0;                     // mean of tvas_by_alpha over the grid
  // per grid point, per reference: mean cosine score over sources (audit)
  std::vector<std::vector<double>> scores_by_alpha;
};

struct TvasReport {
  std::vector<TvasRow> rows;
};

// Edits every source with (descriptor, alpha) for each grid alpha and
// averages ATVAS over sources before differencing against alpha = 0.
// The grid must contain 0.
TvasRow tvas_curve(const Model& model, const std::vector<EditSource>& sources,
                   int descriptor, const std::vector<double>& grid,
                   AblationMode mode, const ReferenceTable& references,
                   const VerifierFn& verifier = identity_verifier());

std::vector<double> default_alpha_grid();  // 0.0, 0.1, ..., 1.0

// CSV columns: descriptor,alpha,atvas,tvas (full round-trip precision).
void export_report(const TvasReport& report, const DescriptorVocab& vocab,
                   const std::filesystem::path& path);

// JSON Lines: {"speaker","descriptor","alpha","vec"} per edited embedding,
// for external projection tools.
void export_embedding_dump(const Model& model,
                           const std::vector<EditSource>& sources,
                           const std::vector<int>& descriptors,
                           const std::vector<double>& grid, AblationMode mode,
                           const std::filesystem::path& path);

}  // namespace vattr
