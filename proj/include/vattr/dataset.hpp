// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <unordered_map>
#include <vector>

#include "vattr/common.hpp"
#include "vattr/rng.hpp"
#include "vattr/vocab.hpp"

namespace vattr {

// One relative-attribute record: speaker B shows the listed attributes more
// prominently than speaker A. An empty descriptor list means the "Similar"
// label. Both speakers are always the same gender.
struct AnnotationTuple {
  std::string speaker_a;
  std::string speaker_b;
  std::vector<int> descriptors;  // ids into the vocabulary, 1..3 entries

  bool is_similar() const { return descriptors.empty(); }
};

struct SpeakerRecord {
  std::string speaker_id;
  Gender gender = Gender::F;
  std::vector<std::pair<std::string, Embedding>> utterances;  // (utt_id, vec)
};

// Uniform-dimension collection of speaker records, keyed by speaker id,
// insertion order preserved.
class EmbeddingStore {
 public:
  int dim() const { return dim_; }
  std::size_t speaker_count() const { return speakers_.size(); }
  const std::vector<SpeakerRecord>& speakers() const { return speakers_; }

  const SpeakerRecord* find(const std::string& speaker_id) const;
  const SpeakerRecord& at(const std::string& speaker_id) const;

  // Mean over the speaker's utterance embeddings.
  Embedding mean_embedding(const std::string& speaker_id) const;

  void add_utterance(const std::string& speaker_id, Gender gender,
                     const std::string& utt_id, Embedding vec);

  // FNV-1a over the raw bit patterns of every utterance vector, used to
  // assert the frozen-input contract around training.
  std::uint64_t content_hash() const;

 private:
  int dim_ = 0;
  std::vector<SpeakerRecord> speakers_;
  std::unordered_map<std::string, std::size_t> index_;
};

// --- annotation files: speakerA<TAB>speakerB<TAB>label ----------------------

std::vector<AnnotationTuple> parse_annotations(std::istream& in,
                                               const DescriptorVocab& vocab,
                                               const std::string& source_name);
std::vector<AnnotationTuple> parse_annotations(
    const std::filesystem::path& path, const DescriptorVocab& vocab);

std::string serialize_annotations(const std::vector<AnnotationTuple>& tuples,
                                  const DescriptorVocab& vocab);
void save_annotations(const std::vector<AnnotationTuple>& tuples,
                      const DescriptorVocab& vocab,
                      const std::filesystem::path& path);

// --- embedding files: JSON Lines, one utterance per line --------------------

EmbeddingStore load_embeddings(std::istream& in,
                               const std::string& source_name);
EmbeddingStore load_embeddings(const std::filesystem::path& path);

std::string serialize_embeddings(const EmbeddingStore& store);
void save_embeddings(const EmbeddingStore& store,
                     const std::filesystem::path& path);

// --- corpus statistics -------------------------------------------------------

struct StatsReport {
  std::size_t tuple_count = 0;
  std::vector<std::size_t> descriptor_counts;  // indexed by descriptor id
  std::vector<double> descriptor_freq_pct;     // % of descriptor occurrences
  double one_descriptor_pct = 0;    // of non-Similar tuples
  double two_descriptor_pct = 0;
  double three_descriptor_pct = 0;
  double similar_pct = 0;           // of all tuples
};

StatsReport dataset_stats(const std::vector<AnnotationTuple>& tuples,
                          const DescriptorVocab& vocab);

// --- training batches --------------------------------------------------------

struct BatchItem {
  const Embedding* speaker_a;
  const Embedding* speaker_b;
  int descriptor;
};

// Uniform over non-Similar tuples, then uniform over the tuple's descriptors
// and each speaker's utterances. Draw order per item: tuple, descriptor,
// utterance A, utterance B.
std::vector<BatchItem> sample_training_batch(
    const EmbeddingStore& store, const std::vector<AnnotationTuple>& tuples,
    std::size_t batch_size, Rng& rng);

}  // namespace vattr
