// SPDX-License-Identifier: Apache-2.0
#include "vattr/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

#include <json.hpp>

namespace vattr {

VerifierFn identity_verifier() {
  return [](const Embedding& e) { return e; };
}

const std::vector<ReferenceEntry>* ReferenceTable::find(Gender gender,
                                                        int descriptor) const {
  const auto it = entries_.find({gender, descriptor});
  if (it == entries_.end()) return nullptr;
  return &it->second;
}

const std::vector<ReferenceEntry>& ReferenceTable::at(Gender gender,
                                                      int descriptor) const {
  const auto* refs = find(gender, descriptor);
  if (!refs) {
    throw DataError("no reference speakers for descriptor id " +
                    std::to_string(descriptor) + ", gender " +
                    std::string(1, gender_char(gender)));
  }
  return *refs;
}

ReferenceTable build_reference_table(
    const std::vector<AnnotationTuple>& tuples, const EmbeddingStore& store,
    const VerifierFn& verifier, std::vector<std::string>* warnings) {
  // occurrence counts per (gender, descriptor, speakerB), insertion order
  std::map<ReferenceTable::Key, std::vector<std::pair<std::string, int>>>
      counts;
  int max_descriptor = -1;
  for (const AnnotationTuple& t : tuples) {
    if (t.is_similar()) continue;
    const SpeakerRecord& b = store.at(t.speaker_b);
    for (int x : t.descriptors) {
      max_descriptor = std::max(max_descriptor, x);
      auto& list = counts[{b.gender, x}];
      const auto it =
          std::find_if(list.begin(), list.end(),
                       [&](const auto& p) { return p.first == t.speaker_b; });
      if (it == list.end()) {
        list.emplace_back(t.speaker_b, 1);
      } else {
        ++it->second;
      }
    }
  }

  ReferenceTable table;
  for (auto& [key, list] : counts) {
    int total = 0;
    for (const auto& [id, occ] : list) total += occ;
    std::vector<ReferenceEntry> refs;
    refs.reserve(list.size());
    for (const auto& [id, occ] : list) {
      ReferenceEntry entry;
      entry.speaker_id = id;
      entry.occurrences = occ;
      entry.weight = static_cast<double>(occ) / static_cast<double>(total);

      const SpeakerRecord& rec = store.at(id);
      Embedding mean;
      for (const auto& [utt, vec] : rec.utterances) {
        const Embedding v = verifier(vec);
        if (mean.empty()) mean.assign(v.size(), 0.0);
        for (std::size_t i = 0; i < v.size(); ++i) mean[i] += v[i];
      }
      const double inv = 1.0 / static_cast<double>(rec.utterances.size());
      for (double& x : mean) x *= inv;
      entry.mean_embedding = std::move(mean);
      refs.push_back(std::move(entry));
    }
    table.entries()[key] = std::move(refs);
  }

  if (warnings && max_descriptor >= 0) {
    for (Gender g : {Gender::F, Gender::M}) {
      for (int x = 0; x <= max_descriptor; ++x) {
        if (!table.find(g, x)) {
          warnings->push_back(
              "descriptor id " + std::to_string(x) + " has no reference "
              "speakers for gender " + std::string(1, gender_char(g)) +
              "; omitted");
        }
      }
    }
  }
  return table;
}

double atvas(std::span<const double> embedding,
             const std::vector<ReferenceEntry>& references,
             const VerifierFn& verifier) {
  if (references.empty()) throw DataError("atvas: empty reference list");
  const Embedding mapped = verifier(Embedding(embedding.begin(), embedding.end()));
  const double norm =
      std::sqrt(std::inner_product(mapped.begin(), mapped.end(),
                                   mapped.begin(), 0.0));
  if (!(norm > kNormEpsilon)) throw NumericError("atvas: zero-norm embedding");
  double score = 0;
  for (const ReferenceEntry& ref : references) {
    score += ref.weight * guarded_cosine(mapped, ref.mean_embedding);
  }
  return score;
}

std::vector<double> default_alpha_grid() {
  std::vector<double> grid;
  for (int i = 0; i <= 10; ++i) grid.push_back(static_cast<double>(i) / 10.0);
  return grid;
}

TvasRow tvas_curve(const Model& model, const std::vector<EditSource>& sources,
                   int descriptor, const std::vector<double>& grid,
                   AblationMode mode, const ReferenceTable& references,
                   const VerifierFn& verifier) {
  if (sources.empty()) throw std::invalid_argument("tvas_curve: no sources");
  if (std::find(grid.begin(), grid.end(), 0.0) == grid.end()) {
    throw std::invalid_argument("tvas_curve: grid must include alpha = 0");
  }

  TvasRow row;
  row.descriptor = descriptor;
  row.grid = grid;
  row.atvas_by_alpha.resize(grid.size());
  row.scores_by_alpha.resize(grid.size());

  for (std::size_t gi = 0; gi < grid.size(); ++gi) {
    double sum = 0;
    std::vector<double> ref_scores;
    for (const EditSource& src : sources) {
      const auto& refs = references.at(src.gender, descriptor);
      const Embedding edited =
          edit_once(model, src.embedding, descriptor, grid[gi], mode);
      sum += atvas(edited, refs, verifier);

      const Embedding mapped = verifier(edited);
      if (ref_scores.empty()) ref_scores.assign(refs.size(), 0.0);
      for (std::size_t r = 0; r < refs.size() && r < ref_scores.size(); ++r) {
        ref_scores[r] += guarded_cosine(mapped, refs[r].mean_embedding);
      }
    }
    row.atvas_by_alpha[gi] = sum / static_cast<double>(sources.size());
    for (double& s : ref_scores) s /= static_cast<double>(sources.size());
    row.scores_by_alpha[gi] = std::move(ref_scores);
  }

  const std::size_t zero_index = static_cast<std::size_t>(
      std::find(grid.begin(), grid.end(), 0.0) - grid.begin());
  const double base = row.atvas_by_alpha[zero_index];
  row.tvas_by_alpha.resize(grid.size());
  double mean = 0;
  for (std::size_t gi = 0; gi < grid.size(); ++gi) {
    row.tvas_by_alpha[gi] = row.atvas_by_alpha[gi] - base;
    mean += row.tvas_by_alpha[gi];
  }
  row.tvas = mean / static_cast<double>(grid.size());
  return row;
}

void export_report(const TvasReport& report, const DescriptorVocab& vocab,
                   const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << "descriptor,alpha,atvas,tvas\n";
  char buf[160];
  for (const TvasRow& row : report.rows) {
    for (std::size_t gi = 0; gi < row.grid.size(); ++gi) {
      std::snprintf(buf, sizeof(buf), "%s,%.17g,%.17g,%.17g\n",
                    vocab.name(row.descriptor).c_str(), row.grid[gi],
                    row.atvas_by_alpha[gi], row.tvas_by_alpha[gi]);
      out << buf;
    }
  }
}

void export_embedding_dump(const Model& model,
                           const std::vector<EditSource>& sources,
                           const std::vector<int>& descriptors,
                           const std::vector<double>& grid, AblationMode mode,
                           const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  for (int x : descriptors) {
    for (double alpha : grid) {
      for (const EditSource& src : sources) {
        nlohmann::json obj;
        obj["speaker"] = src.speaker_id;
        obj["descriptor"] = model.vocab.name(x);
        obj["alpha"] = alpha;
        obj["vec"] = edit_once(model, src.embedding, x, alpha, mode);
        out << obj.dump() << '\n';
      }
    }
  }
}

}  // namespace vattr
