// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "vattr/common.hpp"
#include "vattr/vocab.hpp"

namespace vattr {

enum class ExtractionBackend { kLexical, kLlm };

enum class MatchProvenance { kExact, kLexicalNearest, kLlm };

const char* to_string(MatchProvenance p);

struct ExtractionResult {
  std::vector<int> descriptors;             // vocabulary ids, prompt order
  std::vector<MatchProvenance> provenance;  // parallel to descriptors
  std::string prompt;
};

// Chat-completion endpoint settings. The bearer token is read from the
// named environment variable, never from config files.
struct LlmConfig {
  std::string base_url;    // e.g. http://localhost:8080
  std::string model = "gpt-3.5-turbo";
  std::string path = "/v1/chat/completions";
  std::string token_env = "VATTR_LLM_TOKEN";
  int timeout_seconds = 10;
  int max_retries = 1;
};

struct ExtractionOptions {
  ExtractionBackend backend = ExtractionBackend::kLexical;
  LlmConfig llm;
};

// Lexical backend: case-insensitive whole-word scan in prompt order, with
// comparative/-ness suffix normalization and a small alias lexicon; if the
// scan finds nothing, the nearest descriptor by normalized edit distance
// (< 0.4) over non-stopword tokens is tried. LLM backend: sends the stored
// extraction dialogue to the configured endpoint and validates the numbered
// reply against the vocabulary; on timeout or malformed replies it falls
// back to the lexical backend. Throws DataError when nothing resolves.
ExtractionResult extract_descriptors(const std::string& prompt,
                                     const DescriptorVocab& vocab,
                                     const ExtractionOptions& options);

// Lexical path only, no LLM configuration needed.
ExtractionResult extract_descriptors_lexical(const std::string& prompt,
                                             const DescriptorVocab& vocab);

// The system message sent to the LLM, with the live vocabulary injected.
std::string llm_system_prompt(const DescriptorVocab& vocab);

// Parses a numbered-list reply ("1. Magnetic 2. Bright") against the
// vocabulary; empty result means the reply was unusable.
std::vector<int> parse_llm_reply(const std::string& reply,
                                 const DescriptorVocab& vocab);

}  // namespace vattr
