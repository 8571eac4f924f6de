// SPDX-License-Identifier: Apache-2.0
#include "vattr/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace vattr {

namespace {

using nlohmann::json;

std::string strip_cr(std::string s) {
  if (!s.empty() && s.back() == '\r') s.pop_back();
  return s;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    if (pos == std::string::npos) {
      parts.push_back(s.substr(start));
      break;
    }
    parts.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
  return parts;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void line_error(const std::string& source, std::size_t lineno,
                             const std::string& msg) {
  throw DataError(source + ":" + std::to_string(lineno) + ": " + msg);
}

}  // namespace

// --- EmbeddingStore ----------------------------------------------------------

const SpeakerRecord* EmbeddingStore::find(const std::string& speaker_id) const {
  const auto it = index_.find(speaker_id);
  if (it == index_.end()) return nullptr;
  return &speakers_[it->second];
}

const SpeakerRecord& EmbeddingStore::at(const std::string& speaker_id) const {
  const SpeakerRecord* rec = find(speaker_id);
  if (!rec) throw DataError("unknown speaker: " + speaker_id);
  return *rec;
}

Embedding EmbeddingStore::mean_embedding(const std::string& speaker_id) const {
  const SpeakerRecord& rec = at(speaker_id);
  Embedding mean(static_cast<std::size_t>(dim_), 0.0);
  for (const auto& [utt, vec] : rec.utterances) {
    for (std::size_t i = 0; i < mean.size(); ++i) mean[i] += vec[i];
  }
  const double inv = 1.0 / static_cast<double>(rec.utterances.size());
  for (double& x : mean) x *= inv;
  return mean;
}

void EmbeddingStore::add_utterance(const std::string& speaker_id,
                                   Gender gender, const std::string& utt_id,
                                   Embedding vec) {
  if (vec.empty()) throw DataError("empty embedding for " + speaker_id);
  for (double x : vec) {
    if (!std::isfinite(x)) {
      throw DataError("non-finite embedding value for speaker " + speaker_id);
    }
  }
  if (dim_ == 0) {
    dim_ = static_cast<int>(vec.size());
  } else if (static_cast<int>(vec.size()) != dim_) {
    throw DataError("embedding dimension mismatch for speaker " + speaker_id +
                    ": got " + std::to_string(vec.size()) + ", store has D=" +
                    std::to_string(dim_));
  }
  auto it = index_.find(speaker_id);
  if (it == index_.end()) {
    index_.emplace(speaker_id, speakers_.size());
    speakers_.push_back(SpeakerRecord{speaker_id, gender, {}});
    it = index_.find(speaker_id);
  }
  SpeakerRecord& rec = speakers_[it->second];
  if (rec.gender != gender && !rec.utterances.empty()) {
    throw DataError("conflicting gender for speaker " + speaker_id);
  }
  for (const auto& [existing, _] : rec.utterances) {
    if (existing == utt_id) {
      throw DataError("duplicate utterance key (" + speaker_id + ", " +
                      utt_id + ")");
    }
  }
  rec.utterances.emplace_back(utt_id, std::move(vec));
}

std::uint64_t EmbeddingStore::content_hash() const {
  std::uint64_t h = 1469598103934665603ull;
  const auto mix = [&h](const void* data, std::size_t n) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= bytes[i];
      h *= 1099511628211ull;
    }
  };
  for (const SpeakerRecord& rec : speakers_) {
    mix(rec.speaker_id.data(), rec.speaker_id.size());
    for (const auto& [utt, vec] : rec.utterances) {
      mix(utt.data(), utt.size());
      mix(vec.data(), vec.size() * sizeof(double));
    }
  }
  return h;
}

// --- annotations -------------------------------------------------------------

std::vector<AnnotationTuple> parse_annotations(std::istream& in,
                                               const DescriptorVocab& vocab,
                                               const std::string& source) {
  std::vector<AnnotationTuple> tuples;
  std::string raw;
  std::size_t lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    const std::string line = strip_cr(raw);
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;

    const std::vector<std::string> cols = split(line, '\t');
    if (cols.size() != 3) {
      line_error(source, lineno,
                 "expected speakerA<TAB>speakerB<TAB>label, got " +
                     std::to_string(cols.size()) + " fields");
    }
    AnnotationTuple t;
    t.speaker_a = trim(cols[0]);
    t.speaker_b = trim(cols[1]);
    const std::string label = trim(cols[2]);
    if (t.speaker_a.empty() || t.speaker_b.empty() || label.empty()) {
      line_error(source, lineno, "empty field");
    }
    if (t.speaker_a == t.speaker_b) {
      line_error(source, lineno,
                 "speaker pair must be distinct: " + t.speaker_a);
    }
    if (ascii_lower(label) != ascii_lower(DescriptorVocab::kSimilarLabel)) {
      for (const std::string& tok : split(label, ',')) {
        const std::string name = trim(tok);
        const auto id = vocab.id_of(name);
        if (!id) {
          line_error(source, lineno, "unknown descriptor \"" + name + "\"");
        }
        if (std::find(t.descriptors.begin(), t.descriptors.end(), *id) !=
            t.descriptors.end()) {
          line_error(source, lineno, "duplicate descriptor \"" + name + "\"");
        }
        t.descriptors.push_back(*id);
      }
      if (t.descriptors.size() > 3) {
        line_error(source, lineno, "more than 3 descriptors");
      }
    }
    tuples.push_back(std::move(t));
  }
  return tuples;
}

std::vector<AnnotationTuple> parse_annotations(
    const std::filesystem::path& path, const DescriptorVocab& vocab) {
  std::ifstream in(path);
  if (!in) throw DataError("annotation file not readable: " + path.string());
  return parse_annotations(in, vocab, path.string());
}

std::string serialize_annotations(const std::vector<AnnotationTuple>& tuples,
                                  const DescriptorVocab& vocab) {
  std::ostringstream out;
  for (const AnnotationTuple& t : tuples) {
    out << t.speaker_a << '\t' << t.speaker_b << '\t';
    if (t.is_similar()) {
      out << DescriptorVocab::kSimilarLabel;
    } else {
      for (std::size_t i = 0; i < t.descriptors.size(); ++i) {
        if (i) out << ',';
        out << vocab.name(t.descriptors[i]);
      }
    }
    out << '\n';
  }
  return out.str();
}

void save_annotations(const std::vector<AnnotationTuple>& tuples,
                      const DescriptorVocab& vocab,
                      const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << serialize_annotations(tuples, vocab);
}

// --- embeddings --------------------------------------------------------------

EmbeddingStore load_embeddings(std::istream& in, const std::string& source) {
  EmbeddingStore store;
  std::string raw;
  std::size_t lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    const std::string line = strip_cr(raw);
    if (trim(line).empty()) continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::exception& e) {
      line_error(source, lineno, std::string("bad JSON: ") + e.what());
    }
    if (!obj.contains("gender")) line_error(source, lineno, "missing gender");
    for (const char* key : {"speaker", "utt", "dim", "vec"}) {
      if (!obj.contains(key)) {
        line_error(source, lineno, std::string("missing key \"") + key + "\"");
      }
    }
    const std::string gs = obj["gender"].get<std::string>();
    if (gs != "F" && gs != "M") {
      line_error(source, lineno, "gender must be \"F\" or \"M\", got \"" + gs +
                                     "\"");
    }
    const Gender gender = gs == "F" ? Gender::F : Gender::M;
    const auto dim = obj["dim"].get<std::size_t>();
    Embedding vec = obj["vec"].get<Embedding>();
    if (vec.size() != dim) {
      line_error(source, lineno,
                 "vec length " + std::to_string(vec.size()) +
                     " does not match dim " + std::to_string(dim));
    }
    try {
      store.add_utterance(obj["speaker"].get<std::string>(), gender,
                          obj["utt"].get<std::string>(), std::move(vec));
    } catch (const DataError& e) {
      line_error(source, lineno, e.what());
    }
  }
  if (store.speaker_count() == 0) {
    throw DataError(source + ": no embedding records");
  }
  return store;
}

EmbeddingStore load_embeddings(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("embedding file not readable: " + path.string());
  return load_embeddings(in, path.string());
}

std::string serialize_embeddings(const EmbeddingStore& store) {
  std::ostringstream out;
  for (const SpeakerRecord& rec : store.speakers()) {
    for (const auto& [utt, vec] : rec.utterances) {
      json obj;
      obj["speaker"] = rec.speaker_id;
      obj["gender"] = std::string(1, gender_char(rec.gender));
      obj["utt"] = utt;
      obj["dim"] = vec.size();
      obj["vec"] = vec;
      out << obj.dump() << '\n';
    }
  }
  return out.str();
}

void save_embeddings(const EmbeddingStore& store,
                     const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << serialize_embeddings(store);
}

// --- statistics ----------------------------------------------------------------

StatsReport dataset_stats(const std::vector<AnnotationTuple>& tuples,
                          const DescriptorVocab& vocab) {
  if (tuples.empty()) throw DataError("dataset_stats: no tuples");
  StatsReport r;
  r.tuple_count = tuples.size();
  r.descriptor_counts.assign(static_cast<std::size_t>(vocab.size()), 0);

  std::size_t similar = 0;
  std::size_t by_arity[4] = {0, 0, 0, 0};
  std::size_t occurrences = 0;
  for (const AnnotationTuple& t : tuples) {
    if (t.is_similar()) {
      ++similar;
      continue;
    }
    ++by_arity[t.descriptors.size()];
    for (int id : t.descriptors) {
      ++r.descriptor_counts[static_cast<std::size_t>(id)];
      ++occurrences;
    }
  }

  r.descriptor_freq_pct.assign(r.descriptor_counts.size(), 0.0);
  if (occurrences > 0) {
    for (std::size_t i = 0; i < r.descriptor_counts.size(); ++i) {
      r.descriptor_freq_pct[i] = 100.0 *
                                 static_cast<double>(r.descriptor_counts[i]) /
                                 static_cast<double>(occurrences);
    }
  }
  const std::size_t non_similar = tuples.size() - similar;
  if (non_similar > 0) {
    r.one_descriptor_pct =
        100.0 * static_cast<double>(by_arity[1]) / static_cast<double>(non_similar);
    r.two_descriptor_pct =
        100.0 * static_cast<double>(by_arity[2]) / static_cast<double>(non_similar);
    r.three_descriptor_pct =
        100.0 * static_cast<double>(by_arity[3]) / static_cast<double>(non_similar);
  }
  r.similar_pct =
      100.0 * static_cast<double>(similar) / static_cast<double>(tuples.size());
  return r;
}

// --- batch sampling ------------------------------------------------------------

std::vector<BatchItem> sample_training_batch(
    const EmbeddingStore& store, const std::vector<AnnotationTuple>& tuples,
    std::size_t batch_size, Rng& rng) {
  std::vector<std::size_t> usable;
  usable.reserve(tuples.size());
  for (std::size_t i = 0; i < tuples.size(); ++i) {
    if (!tuples[i].is_similar()) usable.push_back(i);
  }
  if (usable.empty()) {
    throw DataError("no non-Similar tuples available for training");
  }

  std::vector<BatchItem> batch;
  batch.reserve(batch_size);
  for (std::size_t b = 0; b < batch_size; ++b) {
    const AnnotationTuple& t = tuples[usable[rng.uniform_index(usable.size())]];
    const int x = t.descriptors[rng.uniform_index(t.descriptors.size())];
    const SpeakerRecord& a = store.at(t.speaker_a);
    const SpeakerRecord& bsp = store.at(t.speaker_b);
    const Embedding& ea = a.utterances[rng.uniform_index(a.utterances.size())].second;
    const Embedding& eb =
        bsp.utterances[rng.uniform_index(bsp.utterances.size())].second;
    batch.push_back(BatchItem{&ea, &eb, x});
  }
  return batch;
}

}  // namespace vattr
