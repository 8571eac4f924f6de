// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>

#include "vattr/vadp.hpp"

using namespace vattr;

TEST_SUITE("vadp") {

TEST_CASE("all-zero parameters, eps 0 gives alpha 0.5") {
  VadpParams p;
  p.dim = 2;
  p.hidden = 3;
  p.w_hidden.assign(3 * 6, 0.0);
  p.b_hidden.assign(3, 0.0);
  p.w_mean.assign(3, 0.0);
  p.b_mean.assign(1, 0.0);
  p.w_logvar.assign(3, 0.0);
  p.b_logvar.assign(1, 0.0);
  const Embedding a = {1, 2}, b = {3, 4}, t = {5, 6};
  const DegreeSample s = predict_degree(p, a, b, t, 0.0);
  CHECK(s.mu == 0.0);
  CHECK(s.log_var == 0.0);
  CHECK(s.alpha == 0.5);
}

TEST_CASE("mu=2, logvar=0, eps=1 gives sigmoid(3)") {
  // biases select the target heads directly
  VadpParams p;
  p.dim = 1;
  p.hidden = 1;
  p.w_hidden.assign(3, 0.0);
  p.b_hidden.assign(1, 0.0);
  p.w_mean.assign(1, 0.0);
  p.b_mean.assign(1, 2.0);
  p.w_logvar.assign(1, 0.0);
  p.b_logvar.assign(1, 0.0);
  const Embedding e = {0.5};
  const DegreeSample s = predict_degree(p, e, e, e, 1.0);
  CHECK(s.mu == 2.0);
  CHECK(s.log_var == 0.0);
  CHECK(s.alpha == doctest::Approx(0.95257412682243336).epsilon(1e-12));
}

TEST_CASE("alpha strictly inside (0,1), reparameterization identity") {
  Rng rng(4);
  const VadpParams p = init_vadp(4, 6, rng);
  for (int trial = 0; trial < 200; ++trial) {
    Embedding a(4), b(4), t(4);
    for (double& x : a) x = 10.0 * rng.normal();
    for (double& x : b) x = 10.0 * rng.normal();
    for (double& x : t) x = 10.0 * rng.normal();
    const double eps = rng.normal();
    const DegreeSample s = predict_degree(p, a, b, t, eps);
    CHECK(s.alpha > 0.0);
    CHECK(s.alpha < 1.0);
    CHECK(s.eps == eps);
    CHECK(s.alpha ==
          sigmoid(s.mu + std::exp(0.5 * s.log_var) * eps));  // exact
  }
}

TEST_CASE("alpha increases with mu") {
  VadpParams p;
  p.dim = 1;
  p.hidden = 1;
  p.w_hidden.assign(3, 0.0);
  p.b_hidden.assign(1, 0.0);
  p.w_mean.assign(1, 0.0);
  p.b_mean.assign(1, 0.0);
  p.w_logvar.assign(1, 0.0);
  p.b_logvar.assign(1, 0.0);
  const Embedding e = {1.0};
  double prev = 0.0;
  for (double mu = -4.0; mu <= 4.0; mu += 0.5) {
    p.b_mean[0] = mu;
    const double alpha = predict_degree(p, e, e, e, 0.0).alpha;
    CHECK(alpha > prev);
    prev = alpha;
  }
}

TEST_CASE("matches a straight-line oracle") {
  Rng rng(9);
  const VadpParams p = init_vadp(3, 5, rng);
  Embedding a(3), b(3), t(3);
  for (double& x : a) x = rng.normal();
  for (double& x : b) x = rng.normal();
  for (double& x : t) x = rng.normal();

  std::vector<double> input;
  input.insert(input.end(), a.begin(), a.end());
  input.insert(input.end(), b.begin(), b.end());
  input.insert(input.end(), t.begin(), t.end());
  std::vector<double> hidden(5);
  for (int r = 0; r < 5; ++r) {
    double acc = p.b_hidden[r];
    for (int c = 0; c < 9; ++c) acc += p.w_hidden[r * 9 + c] * input[c];
    hidden[r] = acc > 0 ? acc : 0;
  }
  double mu = p.b_mean[0], lv = p.b_logvar[0];
  for (int r = 0; r < 5; ++r) {
    mu += p.w_mean[r] * hidden[r];
    lv += p.w_logvar[r] * hidden[r];
  }
  const DegreeSample s = predict_degree(p, a, b, t, 0.7);
  CHECK(s.mu == doctest::Approx(mu).epsilon(1e-12));
  CHECK(s.log_var == doctest::Approx(lv).epsilon(1e-12));
  CHECK(s.alpha ==
        doctest::Approx(1.0 / (1.0 + std::exp(-(mu + std::exp(0.5 * lv) * 0.7))))
            .epsilon(1e-12));
}

TEST_CASE("dimension mismatch rejected") {
  Rng rng(1);
  const VadpParams p = init_vadp(4, 2, rng);
  const Embedding ok(4, 0.1), bad(3, 0.1);
  CHECK_THROWS_AS(predict_degree(p, ok, ok, bad, 0.0), std::invalid_argument);
}

}  // TEST_SUITE
