// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "vattr/rng.hpp"

using vattr::Rng;

TEST_SUITE("rng") {

TEST_CASE("same seed, same stream") {
  Rng a(42), b(42);
  for (int i = 0; i < 1000; ++i) {
    CHECK(a.next_u64() == b.next_u64());
  }
  for (int i = 0; i < 100; ++i) {
    CHECK(a.uniform() == b.uniform());
    CHECK(a.normal() == b.normal());
    CHECK(a.uniform_index(17) == b.uniform_index(17));
  }
}

TEST_CASE("state save/load resumes the exact stream") {
  Rng a(7);
  for (int i = 0; i < 37; ++i) a.normal();
  const std::string state = a.save_state();

  Rng b(999);
  b.load_state(state);
  for (int i = 0; i < 200; ++i) {
    CHECK(a.next_u64() == b.next_u64());
  }
  CHECK(a.normal() == b.normal());
}

TEST_CASE("uniform in [0,1), uniform_index in range") {
  Rng rng(3);
  for (int i = 0; i < 10000; ++i) {
    const double u = rng.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
  for (int i = 0; i < 10000; ++i) {
    CHECK(rng.uniform_index(7) < 7);
  }
  CHECK(rng.uniform_index(1) == 0);
  CHECK_THROWS_AS(rng.uniform_index(0), std::invalid_argument);
}

TEST_CASE("normal has roughly standard moments") {
  Rng rng(5);
  const int n = 200000;
  double sum = 0, sumsq = 0;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    sum += z;
    sumsq += z * z;
  }
  const double mean = sum / n;
  const double var = sumsq / n - mean * mean;
  CHECK(std::fabs(mean) < 0.01);
  CHECK(std::fabs(var - 1.0) < 0.02);
}

TEST_CASE("malformed state rejected") {
  Rng rng(1);
  CHECK_THROWS_AS(rng.load_state("not a state"), std::invalid_argument);
}

}  // TEST_SUITE
