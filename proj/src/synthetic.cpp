// SPDX-License-Identifier: Apache-2.0
#include "vattr/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "vattr/kernels.hpp"

namespace vattr {

namespace {

using nlohmann::json;

std::string speaker_name(Gender g, int index) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%c%03d", gender_char(g), index);
  return buf;
}

// Random rows orthonormalized with modified Gram-Schmidt, two passes.
std::vector<Embedding> orthonormal_directions(int count, int dim, Rng& rng) {
  std::vector<Embedding> dirs(static_cast<std::size_t>(count));
  for (auto& d : dirs) {
    d.resize(static_cast<std::size_t>(dim));
    for (double& x : d) x = rng.normal();
  }
  for (int pass = 0; pass < 2; ++pass) {
    for (int i = 0; i < count; ++i) {
      for (int j = 0; j < i; ++j) {
        const double proj = kernels::dot(dirs[i].data(), dirs[j].data(),
                                         dirs[i].size());
        kernels::axpy(-proj, dirs[j].data(), dirs[i].data(), dirs[i].size());
      }
      const double norm = std::sqrt(
          kernels::dot(dirs[i].data(), dirs[i].data(), dirs[i].size()));
      if (norm < 1e-12) {
        throw NumericError("degenerate random direction during Gram-Schmidt");
      }
      for (double& x : dirs[i]) x /= norm;
    }
  }
  return dirs;
}

}  // namespace

Embedding SyntheticGroundTruth::clean_embedding(
    const std::string& speaker_id) const {
  const auto it = coefficients.find(speaker_id);
  if (it == coefficients.end()) {
    throw DataError("no ground-truth coefficients for speaker " + speaker_id);
  }
  Embedding e = base;
  for (std::size_t x = 0; x < directions.size(); ++x) {
    kernels::axpy(it->second[x], directions[x].data(), e.data(), e.size());
  }
  return e;
}

SyntheticCorpus generate_synthetic(const SyntheticSpec& spec) {
  if (spec.dim < spec.vocab_size) {
    throw DataError("synthetic spec infeasible: dim " +
                    std::to_string(spec.dim) + " < vocab size " +
                    std::to_string(spec.vocab_size));
  }
  if (spec.speakers_per_gender < 2) {
    throw DataError("synthetic spec needs at least 2 speakers per gender");
  }
  if (spec.utterances_per_speaker < 1) {
    throw DataError("synthetic spec needs at least 1 utterance per speaker");
  }

  SyntheticCorpus corpus;
  std::vector<std::string> names;
  names.reserve(static_cast<std::size_t>(spec.vocab_size));
  for (int x = 0; x < spec.vocab_size; ++x) {
    names.push_back("Attr" + std::to_string(x));
  }
  corpus.vocab = DescriptorVocab::from_names(std::move(names));

  Rng rng(spec.seed);
  corpus.truth.directions =
      orthonormal_directions(spec.vocab_size, spec.dim, rng);
  // unit-norm base, matching the scale of verification-style embeddings
  corpus.truth.base.resize(static_cast<std::size_t>(spec.dim));
  double base_norm = 0;
  for (double& x : corpus.truth.base) {
    x = rng.normal();
    base_norm += x * x;
  }
  base_norm = std::sqrt(base_norm);
  if (base_norm < 1e-12) throw NumericError("degenerate synthetic base");
  for (double& x : corpus.truth.base) x /= base_norm;
  corpus.truth.noise_scale = spec.noise_scale;
  corpus.truth.threshold = spec.threshold;

  // Draw order per speaker: V coefficients, then per-utterance noise.
  // Salient attributes are sparse and bimodal: a speaker sits at a neutral
  // baseline on most attributes and clearly exhibits a few, which is how
  // perceptual voice descriptors behave and gives gap-thresholded
  // annotations a crisp meaning.
  for (Gender g : {Gender::F, Gender::M}) {
    for (int i = 0; i < spec.speakers_per_gender; ++i) {
      const std::string id = speaker_name(g, i);
      std::vector<double> coeff(static_cast<std::size_t>(spec.vocab_size));
      for (double& a : coeff) {
        const bool salient = rng.uniform() < 0.25;
        const double jitter = rng.uniform(-0.05, 0.05);
        a = (salient ? 0.9 : 0.3) + jitter;
      }
      const auto& stored =
          corpus.truth.coefficients.emplace(id, std::move(coeff)).first->second;

      Embedding clean = corpus.truth.base;
      for (int x = 0; x < spec.vocab_size; ++x) {
        kernels::axpy(stored[static_cast<std::size_t>(x)],
                      corpus.truth.directions[static_cast<std::size_t>(x)].data(),
                      clean.data(), clean.size());
      }
      for (int u = 0; u < spec.utterances_per_speaker; ++u) {
        Embedding e = clean;
        for (double& x : e) x += spec.noise_scale * rng.normal();
        corpus.store.add_utterance(id, g, "u" + std::to_string(u),
                                   std::move(e));
      }
    }
  }

  // All ordered same-gender pairs, in id order.
  for (Gender g : {Gender::F, Gender::M}) {
    for (int a = 0; a < spec.speakers_per_gender; ++a) {
      for (int b = 0; b < spec.speakers_per_gender; ++b) {
        if (a == b) continue;
        const std::string ida = speaker_name(g, a);
        const std::string idb = speaker_name(g, b);
        const auto& ca = corpus.truth.coefficients.at(ida);
        const auto& cb = corpus.truth.coefficients.at(idb);

        std::vector<std::pair<double, int>> gaps;  // (a_B - a_A, descriptor)
        for (int x = 0; x < spec.vocab_size; ++x) {
          const double gap = cb[static_cast<std::size_t>(x)] -
                             ca[static_cast<std::size_t>(x)];
          if (gap > spec.threshold) gaps.emplace_back(gap, x);
        }
        std::sort(gaps.begin(), gaps.end(), [](const auto& l, const auto& r) {
          if (l.first != r.first) return l.first > r.first;
          return l.second < r.second;
        });
        if (gaps.size() > 3) gaps.resize(3);

        AnnotationTuple t;
        t.speaker_a = ida;
        t.speaker_b = idb;
        for (const auto& [gap, x] : gaps) t.descriptors.push_back(x);
        corpus.tuples.push_back(std::move(t));
      }
    }
  }
  return corpus;
}

void save_ground_truth(const SyntheticGroundTruth& truth,
                       const std::filesystem::path& path) {
  json obj;
  obj["format"] = "vattr-synthtruth-v1";
  obj["directions"] = truth.directions;
  obj["coefficients"] = truth.coefficients;
  obj["base"] = truth.base;
  obj["noise_scale"] = truth.noise_scale;
  obj["threshold"] = truth.threshold;
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << obj.dump(2) << '\n';
}

SyntheticGroundTruth load_ground_truth(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("ground-truth file not readable: " + path.string());
  json obj;
  try {
    in >> obj;
  } catch (const json::exception& e) {
    throw DataError(path.string() + ": bad JSON: " + e.what());
  }
  if (obj.value("format", "") != "vattr-synthtruth-v1") {
    throw DataError(path.string() + ": not a vattr-synthtruth-v1 file");
  }
  SyntheticGroundTruth truth;
  truth.directions = obj["directions"].get<std::vector<Embedding>>();
  truth.coefficients =
      obj["coefficients"].get<std::map<std::string, std::vector<double>>>();
  truth.base = obj["base"].get<Embedding>();
  truth.noise_scale = obj["noise_scale"].get<double>();
  truth.threshold = obj["threshold"].get<double>();
  return truth;
}

}  // namespace vattr
