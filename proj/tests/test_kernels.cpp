// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <vector>

#include "vattr/kernels.hpp"
#include "vattr/rng.hpp"

using namespace vattr;

namespace {

std::vector<double> random_vec(std::size_t n, Rng& rng, double lo = -2.0,
                               double hi = 2.0) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.uniform(lo, hi);
  return v;
}

}  // namespace

TEST_SUITE("kernels") {

TEST_CASE("scalar dot matches plain loop") {
  Rng rng(7);
  for (std::size_t n : {0u, 1u, 3u, 8u, 31u, 256u}) {
    const auto a = random_vec(n, rng);
    const auto b = random_vec(n, rng);
    double expect = 0;
    for (std::size_t i = 0; i < n; ++i) expect += a[i] * b[i];
    CHECK(kernels::scalar().dot(a.data(), b.data(), n) ==
          doctest::Approx(expect).epsilon(1e-15));
  }
}

TEST_CASE("scalar adamw single-element hand case") {
  // theta=1, g=1, lr=0.1, beta1=0.8, beta2=0.99, wd=0, step 1
  double p = 1.0, g = 1.0, m = 0.0, v = 0.0;
  const double bc1 = 1.0 - 0.8;  // 1 - beta1^1
  const double bc2 = 1.0 - 0.99;
  kernels::scalar().adamw_update(&p, &g, &m, &v, 1, 0.1, 0.8, 0.99, 1e-8, 0.0,
                                 bc1, bc2);
  // mhat = vhat = 1 -> p = 1 - 0.1 * 1/(1 + 1e-8)
  CHECK(p == doctest::Approx(1.0 - 0.1 / (1.0 + 1e-8)).epsilon(1e-12));
  CHECK(p == doctest::Approx(0.9).epsilon(1e-7));
}

TEST_CASE("SIMD backends agree with scalar reference") {
  // elementwise kernels bit-exact, dot within reduction rounding
  Rng rng(11);
  for (const char* name : {"avx2", "neon"}) {
    if (!kernels::select(name)) continue;
    INFO("backend: ", name);
    const kernels::Ops& simd = kernels::active();

    for (std::size_t n : {1u, 2u, 3u, 4u, 5u, 7u, 8u, 15u, 64u, 257u}) {
      const auto a = random_vec(n, rng);
      const auto b = random_vec(n, rng, -1.0, 3.0);

      const double ds = kernels::scalar().dot(a.data(), b.data(), n);
      const double dv = simd.dot(a.data(), b.data(), n);
      CHECK(dv == doctest::Approx(ds).epsilon(1e-13));

      auto ys = b;
      auto yv = b;
      kernels::scalar().axpy(0.37, a.data(), ys.data(), n);
      simd.axpy(0.37, a.data(), yv.data(), n);
      CHECK(ys == yv);  // bit-exact

      std::vector<double> rs(n), rv(n);
      kernels::scalar().relu(a.data(), rs.data(), n);
      simd.relu(a.data(), rv.data(), n);
      CHECK(rs == rv);

      auto ps = a, pv = a;
      auto ms = random_vec(n, rng, 0.0, 1.0), vs = random_vec(n, rng, 0.0, 1.0);
      auto mv = ms, vv = vs;
      const auto grad = random_vec(n, rng);
      const double bc1 = 1.0 - std::pow(0.8, 5.0);
      const double bc2 = 1.0 - std::pow(0.99, 5.0);
      kernels::scalar().adamw_update(ps.data(), grad.data(), ms.data(),
                                     vs.data(), n, 2e-4, 0.8, 0.99, 1e-8,
                                     0.01, bc1, bc2);
      simd.adamw_update(pv.data(), grad.data(), mv.data(), vv.data(), n, 2e-4,
                        0.8, 0.99, 1e-8, 0.01, bc1, bc2);
      CHECK(ps == pv);
      CHECK(ms == mv);
      CHECK(vs == vv);
    }
  }
  kernels::select("auto");
}

TEST_CASE("backend selection") {
  CHECK(kernels::select("scalar"));
  CHECK(std::string(kernels::active().name) == "scalar");
  CHECK_FALSE(kernels::select("bogus"));
  CHECK(std::string(kernels::active().name) == "scalar");
  CHECK(kernels::select("auto"));
  CHECK(kernels::available().find("scalar") == 0);
}

}  // TEST_SUITE
