// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <atomic>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "vattr/extract.hpp"
#include "vattr/resources.hpp"

using namespace vattr;

namespace {

std::vector<std::string> names_of(const ExtractionResult& result,
                                  const DescriptorVocab& vocab) {
  std::vector<std::string> names;
  for (int id : result.descriptors) names.push_back(vocab.name(id));
  return names;
}

}  // namespace

TEST_SUITE("extract") {

TEST_CASE("stock prompt wordings resolve to their descriptors") {
  const DescriptorVocab vocab = DescriptorVocab::builtin_default();
  const auto lex = [&](const std::string& prompt) {
    return names_of(extract_descriptors_lexical(prompt, vocab), vocab);
  };

  CHECK(lex("I want the sound to be more magnetic") ==
        std::vector<std::string>{"Magnetic"});
  CHECK(lex("I want the sound to be more magnetic and bright") ==
        std::vector<std::string>{"Magnetic", "Bright"});
  CHECK(lex("I want the sound to become more magnetic, bright and "
            "transparent") ==
        std::vector<std::string>{"Magnetic", "Bright", "Transparent"});
  CHECK(lex("I want the voice to be hoarse and at the same time deeper") ==
        std::vector<std::string>{"Hoarse", "Low"});
  CHECK(lex("I want to achieve a lower-pitch sound.") ==
        std::vector<std::string>{"Low"});
  CHECK(lex("I'd like to add a touch of coarseness to this voice.") ==
        std::vector<std::string>{"Coarse"});
}

TEST_CASE("case-insensitive whole-word matching") {
  const DescriptorVocab vocab = DescriptorVocab::builtin_default();
  const ExtractionResult r =
      extract_descriptors_lexical("make it more BRIGHT", vocab);
  REQUIRE(r.descriptors.size() == 1);
  CHECK(vocab.name(r.descriptors[0]) == "Bright");
  CHECK(r.provenance[0] == MatchProvenance::kExact);
}

TEST_CASE("comparative and -ness forms fold to the descriptor") {
  const DescriptorVocab vocab = DescriptorVocab::builtin_default();
  const auto first = [&](const std::string& prompt) {
    return vocab.name(
        extract_descriptors_lexical(prompt, vocab).descriptors.at(0));
  };
  CHECK(first("could it be brighter") == "Bright");
  CHECK(first("a thinner sound please") == "Thin");
  CHECK(first("make it purer") == "Pure");
  CHECK(first("somewhat softer now") == "Soft");
  CHECK(first("the huskiest voice you can") == "Husky");
}

TEST_CASE("extraction is idempotent over the sweep templates") {
  const DescriptorVocab vocab = DescriptorVocab::builtin_default();
  const std::vector<std::string> templates = resources::prompt_templates();
  REQUIRE(templates.size() == 10);
  for (const std::string& tpl : templates) {
    const auto pos = tpl.find("[Descriptor]");
    REQUIRE(pos != std::string::npos);
    for (int x = 0; x < vocab.size(); ++x) {
      std::string prompt = tpl;
      prompt.replace(pos, std::string("[Descriptor]").size(), vocab.name(x));
      const ExtractionResult r = extract_descriptors_lexical(prompt, vocab);
      REQUIRE(r.descriptors.size() == 1);
      CHECK(r.descriptors[0] == x);
    }
  }
}

TEST_CASE("fuzzy path catches near-misses but not scaffolding words") {
  const DescriptorVocab vocab = DescriptorVocab::builtin_default();
  // typo with no exact match anywhere: fuzzy path may engage
  const ExtractionResult r =
      extract_descriptors_lexical("please go magnetik", vocab);
  REQUIRE(r.descriptors.size() == 1);
  CHECK(vocab.name(r.descriptors[0]) == "Magnetic");
  CHECK(r.provenance[0] == MatchProvenance::kLexicalNearest);

  // "sound" is close to "Round" but must never match
  CHECK_THROWS_WITH_AS(
      extract_descriptors_lexical("I want the sound to change", vocab),
      doctest::Contains("no attribute"), DataError);
}

TEST_CASE("digit-bearing descriptor names match whole words") {
  // synthetic vocabularies use names like Attr1
  const DescriptorVocab vocab =
      DescriptorVocab::from_names({"Attr0", "Attr1", "Attr2"});
  const ExtractionResult r =
      extract_descriptors_lexical("make the voice more attr1", vocab);
  REQUIRE(r.descriptors == std::vector<int>{1});
  CHECK(r.provenance[0] == MatchProvenance::kExact);
}

TEST_CASE("no attribute found is an explicit error") {
  const DescriptorVocab vocab = DescriptorVocab::builtin_default();
  CHECK_THROWS_AS(extract_descriptors_lexical("hello there", vocab),
                  DataError);
  CHECK_THROWS_AS(extract_descriptors_lexical("", vocab),
                  std::invalid_argument);
}

TEST_CASE("system prompt embeds the active vocabulary") {
  const DescriptorVocab vocab = DescriptorVocab::builtin_default();
  const std::string prompt = llm_system_prompt(vocab);
  CHECK(prompt.find("Bright, Thin, Coarse, Slim") != std::string::npos);
  CHECK(prompt.find("{DESCRIPTORS}") == std::string::npos);
  CHECK(prompt.find("descriptor set") != std::string::npos);
}

TEST_CASE("numbered-list replies parse against the vocabulary") {
  const DescriptorVocab vocab = DescriptorVocab::builtin_default();
  CHECK(parse_llm_reply("1. Magnetic  2. Bright", vocab) ==
        std::vector<int>{7, 0});
  CHECK(parse_llm_reply(
            "the closest descriptors would be: 1. Hoarse 2. Low", vocab) ==
        std::vector<int>{9, 4});
  CHECK(parse_llm_reply("1.Low", vocab) == std::vector<int>{4});
  CHECK(parse_llm_reply("1) Coarse, 2) Coarse", vocab) ==
        std::vector<int>{2});
  CHECK(parse_llm_reply("1. Sparkly", vocab).empty());
  CHECK(parse_llm_reply("no numbers here", vocab).empty());
}

TEST_CASE("llm backend against a local endpoint") {
  const DescriptorVocab vocab = DescriptorVocab::builtin_default();

  httplib::Server server;
  std::atomic<int> hits{0};
  server.Post("/v1/chat/completions", [&](const httplib::Request& req,
                                          httplib::Response& res) {
    ++hits;
    const auto body = nlohmann::json::parse(req.body);
    const std::string user =
        body.at("messages").at(1).at("content").get<std::string>();
    nlohmann::json reply;
    std::string content = "1. Hoarse 2. Low";
    if (user.find("garbled") != std::string::npos) {
      content = "no descriptors for you";
    }
    reply["choices"] = {{{"message", {{"role", "assistant"},
                                      {"content", content}}}}};
    res.set_content(reply.dump(), "application/json");
  });
  const int port = server.bind_to_any_port("127.0.0.1");
  REQUIRE(port > 0);
  std::thread server_thread([&server] { server.listen_after_bind(); });
  while (!server.is_running()) {
    std::this_thread::sleep_for(std::chrono::milliseconds(1));
  }

  ExtractionOptions options;
  options.backend = ExtractionBackend::kLlm;
  options.llm.base_url = "http://127.0.0.1:" + std::to_string(port);

  SUBCASE("well-formed reply is used verbatim") {
    const ExtractionResult r = extract_descriptors(
        "I want the voice to be hoarse and at the same time deeper", vocab,
        options);
    CHECK(names_of(r, vocab) == std::vector<std::string>{"Hoarse", "Low"});
    CHECK(r.provenance[0] == MatchProvenance::kLlm);
  }

  SUBCASE("malformed reply falls back to the lexical scan") {
    const ExtractionResult r =
        extract_descriptors("garbled but still bright", vocab, options);
    CHECK(names_of(r, vocab) == std::vector<std::string>{"Bright"});
    CHECK(r.provenance[0] == MatchProvenance::kExact);
  }

  server.stop();
  server_thread.join();
  CHECK(hits.load() >= 1);  // each subcase reruns the body with one request
}

TEST_CASE("unreachable endpoint falls back, missing config errors out") {
  const DescriptorVocab vocab = DescriptorVocab::builtin_default();
  ExtractionOptions options;
  options.backend = ExtractionBackend::kLlm;

  // not configured at all: error naming the key
  CHECK_THROWS_WITH_AS(extract_descriptors("more bright", vocab, options),
                       doctest::Contains("base_url"), DataError);

  // configured but unreachable: lexical fallback
  options.llm.base_url = "http://127.0.0.1:1";
  options.llm.timeout_seconds = 1;
  options.llm.max_retries = 0;
  const ExtractionResult r =
      extract_descriptors("more bright", vocab, options);
  CHECK(names_of(r, vocab) == std::vector<std::string>{"Bright"});
}

}  // TEST_SUITE
