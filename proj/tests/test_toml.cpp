// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include "vattr/common.hpp"
#include "vattr/toml.hpp"

using namespace vattr;

TEST_SUITE("toml") {

TEST_CASE("sections, scalars, arrays, comments") {
  const auto table = toml::parse(
      "# run config\n"
      "top = 3\n"
      "[paths]\n"
      "embeddings = \"emb.jsonl\"  # inline comment\n"
      "out = \"dir with # hash\"\n"
      "[train]\n"
      "steps = 3000\n"
      "lr = 2e-4\n"
      "tau = 5.0\n"
      "resume = false\n"
      "verbose = true\n"
      "[eval]\n"
      "grid = [0.0, 0.5, 1.0]\n"
      "names = [\"a\", \"b\"]\n",
      "<test>");

  CHECK(table.get_integer("top") == 3);
  CHECK(table.get_string("paths.embeddings") == "emb.jsonl");
  CHECK(table.get_string("paths.out") == "dir with # hash");
  CHECK(table.get_integer("train.steps") == 3000);
  CHECK(table.get_number("train.lr") == doctest::Approx(2e-4));
  CHECK(table.get_number("train.tau") == 5.0);
  CHECK(table.get_boolean("train.resume") == false);
  CHECK(table.get_boolean("train.verbose") == true);
  CHECK(table.get_number_array("eval.grid") ==
        std::vector<double>{0.0, 0.5, 1.0});
  CHECK_FALSE(table.get_string("paths.missing").has_value());
  // integers also read as numbers
  CHECK(table.get_number("train.steps") == 3000.0);
}

TEST_CASE("errors carry the line number") {
  CHECK_THROWS_WITH_AS(toml::parse("key\n", "<t>"), doctest::Contains("<t>:1"),
                       DataError);
  CHECK_THROWS_WITH_AS(toml::parse("a = 1\na = 2\n", "<t>"),
                       doctest::Contains("duplicate"), DataError);
  CHECK_THROWS_WITH_AS(toml::parse("[sec\n", "<t>"),
                       doctest::Contains("section"), DataError);
  CHECK_THROWS_AS(toml::parse("x = \"unterminated\n", "<t>"), DataError);
  CHECK_THROWS_AS(toml::parse("x = 12abc\n", "<t>"), DataError);
}

TEST_CASE("type mismatches are rejected") {
  const auto table = toml::parse("x = 3\ns = \"str\"\n", "<t>");
  CHECK_THROWS_AS(table.get_boolean("x"), DataError);
  CHECK_THROWS_AS(table.get_integer("s"), DataError);
  CHECK_THROWS_AS(table.get_number("s"), DataError);
}

}  // TEST_SUITE
