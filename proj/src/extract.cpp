// SPDX-License-Identifier: Apache-2.0
#include "vattr/extract.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include <httplib.h>
#include <json.hpp>

#include "vattr/resources.hpp"

namespace vattr {

const char* to_string(MatchProvenance p) {
  switch (p) {
    case MatchProvenance::kExact: return "exact";
    case MatchProvenance::kLexicalNearest: return "lexical-nearest";
    case MatchProvenance::kLlm: return "llm";
  }
  return "?";
}

namespace {

// Scaffolding words that must never fuzzy-match a descriptor.
const std::unordered_set<std::string>& stopwords() {
  static const std::unordered_set<std::string> words = {
      "i",      "a",       "an",      "the",     "this",   "that",  "it",
      "its",    "to",      "be",      "is",      "are",    "was",   "were",
      "am",     "and",     "or",      "of",      "in",     "on",    "at",
      "for",    "with",    "so",      "very",    "bit",    "touch", "want",
      "wants",  "wanted",  "like",    "liked",   "would",  "could", "should",
      "please", "make",    "makes",   "made",    "let",    "hope",  "need",
      "needs",  "become",  "becomes", "became",  "sound",  "sounds",
      "sounding", "voice", "voices",  "speech",  "speaker", "tone", "timbre",
      "pitch",  "pitched", "more",    "most",    "slightly", "little", "d",
      "ll",     "s",       "add",     "achieve", "same",   "time",  "as",
      "but",    "me",      "my",      "turn",    "into",   "one",   "get"};
  return words;
}

std::vector<std::string> tokenize(const std::string& prompt) {
  std::vector<std::string> tokens;
  std::string cur;
  for (char ch : prompt) {
    if (std::isalnum(static_cast<unsigned char>(ch))) {
      cur += static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    } else if (!cur.empty()) {
      tokens.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) tokens.push_back(std::move(cur));
  return tokens;
}

std::string undouble(const std::string& s) {
  if (s.size() >= 2 && s[s.size() - 1] == s[s.size() - 2]) {
    return s.substr(0, s.size() - 1);
  }
  return s;
}

// Candidate base forms of a token: the token itself plus comparative
// (-er/-est/-ier/-iest) and -ness strippings. "thinner" -> "thin",
// "purer" -> "pure", "huskier" -> "husky", "coarseness" -> "coarse".
std::vector<std::string> base_forms(const std::string& token) {
  std::vector<std::string> forms = {token};
  const auto add = [&forms](const std::string& f) {
    if (f.size() >= 2 &&
        std::find(forms.begin(), forms.end(), f) == forms.end()) {
      forms.push_back(f);
    }
  };
  const auto ends_with = [&token](const char* suffix) {
    const std::string s(suffix);
    return token.size() > s.size() &&
           token.compare(token.size() - s.size(), s.size(), s) == 0;
  };
  if (ends_with("iest")) add(token.substr(0, token.size() - 4) + "y");
  if (ends_with("est")) {
    const std::string stem = token.substr(0, token.size() - 3);
    add(stem);
    add(stem + "e");
    add(undouble(stem));
  }
  if (ends_with("ier")) add(token.substr(0, token.size() - 3) + "y");
  if (ends_with("er")) {
    const std::string stem = token.substr(0, token.size() - 2);
    add(stem);
    add(stem + "e");
    add(undouble(stem));
  }
  if (ends_with("ness")) {
    const std::string stem = token.substr(0, token.size() - 4);
    add(stem);
    add(undouble(stem));
  }
  return forms;
}

std::size_t edit_distance(const std::string& a, const std::string& b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

double normalized_distance(const std::string& a, const std::string& b) {
  const std::size_t longer = std::max(a.size(), b.size());
  if (longer == 0) return 0.0;
  return static_cast<double>(edit_distance(a, b)) /
         static_cast<double>(longer);
}

const std::unordered_map<std::string, std::string>& alias_map() {
  static const std::unordered_map<std::string, std::string> aliases = [] {
    std::unordered_map<std::string, std::string> m;
    for (const auto& [alias, descriptor] : resources::descriptor_aliases()) {
      m.emplace(ascii_lower(alias), descriptor);
    }
    return m;
  }();
  return aliases;
}

void append_match(ExtractionResult& result, int id, MatchProvenance prov) {
  if (std::find(result.descriptors.begin(), result.descriptors.end(), id) ==
      result.descriptors.end()) {
    result.descriptors.push_back(id);
    result.provenance.push_back(prov);
  }
}

}  // namespace

ExtractionResult extract_descriptors_lexical(const std::string& prompt,
                                             const DescriptorVocab& vocab) {
  if (prompt.empty()) throw std::invalid_argument("empty prompt");
  ExtractionResult result;
  result.prompt = prompt;

  const std::vector<std::string> tokens = tokenize(prompt);
  for (const std::string& token : tokens) {
    for (const std::string& form : base_forms(token)) {
      if (const auto id = vocab.id_of(form)) {
        append_match(result, *id, MatchProvenance::kExact);
        break;
      }
      const auto alias = alias_map().find(form);
      if (alias != alias_map().end()) {
        if (const auto id = vocab.id_of(alias->second)) {
          append_match(result, *id, MatchProvenance::kLexicalNearest);
          break;
        }
      }
    }
  }

  if (result.descriptors.empty()) {
    // Nothing matched whole words; take each candidate's nearest descriptor
    // by normalized edit distance, below 0.4 only.
    for (const std::string& token : tokens) {
      if (stopwords().count(token) || token.size() < 3) continue;
      double best = 1.0;
      int best_id = -1;
      for (const std::string& form : base_forms(token)) {
        for (int id = 0; id < vocab.size(); ++id) {
          const double d = normalized_distance(form, ascii_lower(vocab.name(id)));
          if (d < best) {
            best = d;
            best_id = id;
          }
        }
      }
      if (best_id >= 0 && best < 0.4) {
        append_match(result, best_id, MatchProvenance::kLexicalNearest);
      }
    }
  }

  if (result.descriptors.empty()) {
    throw DataError("no attribute found in prompt: \"" + prompt + "\"");
  }
  return result;
}

std::string llm_system_prompt(const DescriptorVocab& vocab) {
  std::string joined;
  for (int i = 0; i < vocab.size(); ++i) {
    if (i) joined += ", ";
    joined += vocab.name(i);
  }
  std::string text = resources::llm_system_prompt_template();
  const std::string placeholder = "{DESCRIPTORS}";
  const auto pos = text.find(placeholder);
  if (pos != std::string::npos) {
    text.replace(pos, placeholder.size(), joined);
  }
  return text;
}

std::vector<int> parse_llm_reply(const std::string& reply,
                                 const DescriptorVocab& vocab) {
  // Accept "1. Magnetic 2. Bright", "1.Low", "2) Coarse", commas optional.
  std::vector<int> ids;
  std::size_t i = 0;
  while (i < reply.size()) {
    if (!std::isdigit(static_cast<unsigned char>(reply[i]))) {
      ++i;
      continue;
    }
    while (i < reply.size() && std::isdigit(static_cast<unsigned char>(reply[i]))) ++i;
    while (i < reply.size() &&
           (reply[i] == '.' || reply[i] == ')' || reply[i] == ':' ||
            reply[i] == ' ' || reply[i] == '\t')) {
      ++i;
    }
    std::string word;
    while (i < reply.size() &&
           std::isalpha(static_cast<unsigned char>(reply[i]))) {
      word += reply[i];
      ++i;
    }
    if (word.empty()) continue;
    const auto id = vocab.id_of(word);
    if (!id) return {};  // reply mentions something outside the vocabulary
    if (std::find(ids.begin(), ids.end(), *id) == ids.end()) ids.push_back(*id);
  }
  return ids;
}

namespace {

ExtractionResult extract_via_llm(const std::string& prompt,
                                 const DescriptorVocab& vocab,
                                 const LlmConfig& config) {
  if (config.base_url.empty()) {
    throw DataError("llm backend selected but llm.base_url is not configured");
  }

  nlohmann::json body;
  body["model"] = config.model;
  body["temperature"] = 0;
  body["messages"] = {
      {{"role", "system"}, {"content", llm_system_prompt(vocab)}},
      {{"role", "user"}, {"content", prompt}}};
  const std::string payload = body.dump();

  for (int attempt = 0; attempt <= config.max_retries; ++attempt) {
    httplib::Client client(config.base_url);
    client.set_connection_timeout(config.timeout_seconds, 0);
    client.set_read_timeout(config.timeout_seconds, 0);
    httplib::Headers headers;
    if (const char* token = std::getenv(config.token_env.c_str())) {
      headers.emplace("Authorization", std::string("Bearer ") + token);
    }
    const httplib::Result res =
        client.Post(config.path, headers, payload, "application/json");
    if (!res || res->status != 200) continue;
    try {
      const auto reply = nlohmann::json::parse(res->body);
      const std::string content =
          reply.at("choices").at(0).at("message").at("content")
              .get<std::string>();
      const std::vector<int> ids = parse_llm_reply(content, vocab);
      if (ids.empty()) break;  // malformed or out-of-vocabulary reply
      ExtractionResult result;
      result.prompt = prompt;
      for (int id : ids) {
        result.descriptors.push_back(id);
        result.provenance.push_back(MatchProvenance::kLlm);
      }
      return result;
    } catch (const nlohmann::json::exception&) {
      break;
    }
  }
  return extract_descriptors_lexical(prompt, vocab);
}

}  // namespace

ExtractionResult extract_descriptors(const std::string& prompt,
                                     const DescriptorVocab& vocab,
                                     const ExtractionOptions& options) {
  if (prompt.empty()) throw std::invalid_argument("empty prompt");
  if (options.backend == ExtractionBackend::kLlm) {
    return extract_via_llm(prompt, vocab, options.llm);
  }
  return extract_descriptors_lexical(prompt, vocab);
}

}  // namespace vattr
