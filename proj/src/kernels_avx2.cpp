// SPDX-License-Identifier: Apache-2.0
#include "vattr/kernels.hpp"

#if defined(VATTR_KERNELS_AVX2)

#include <immintrin.h>

#include <cmath>

// AVX2 kernels, 4 doubles per lane. Elementwise ops use the same
// multiply-then-add expression tree as the scalar reference so the results
// are bit-identical; dot accumulates four partial sums and only has to match
// within rounding.

namespace vattr::kernels {

namespace {

double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d va = _mm256_loadu_pd(a + i);
    const __m256d vb = _mm256_loadu_pd(b + i);
    acc = _mm256_add_pd(acc, _mm256_mul_pd(va, vb));
  }
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, acc);
  double sum = (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
  for (; i < n; ++i) {
    sum += a[i] * b[i];
  }
  return sum;
}

void axpy_avx2(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d vx = _mm256_loadu_pd(x + i);
    const __m256d vy = _mm256_loadu_pd(y + i);
    _mm256_storeu_pd(y + i, _mm256_add_pd(vy, _mm256_mul_pd(va, vx)));
  }
  for (; i < n; ++i) {
    y[i] = y[i] + alpha * x[i];
  }
}

void relu_avx2(const double* x, double* out, std::size_t n) {
  const __m256d zero = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(out + i, _mm256_max_pd(_mm256_loadu_pd(x + i), zero));
  }
  for (; i < n; ++i) {
    out[i] = x[i] > 0.0 ? x[i] : 0.0;
  }
}

void adamw_avx2(double* p, const double* g, double* m, double* v,
                std::size_t n, double lr, double beta1, double beta2,
                double eps, double weight_decay, double bc1, double bc2) {
  const __m256d vb1 = _mm256_set1_pd(beta1);
  const __m256d vb1c = _mm256_set1_pd(1.0 - beta1);
  const __m256d vb2 = _mm256_set1_pd(beta2);
  const __m256d vb2c = _mm256_set1_pd(1.0 - beta2);
  const __m256d vbc1 = _mm256_set1_pd(bc1);
  const __m256d vbc2 = _mm256_set1_pd(bc2);
  const __m256d veps = _mm256_set1_pd(eps);
  const __m256d vwd = _mm256_set1_pd(weight_decay);
  const __m256d vlr = _mm256_set1_pd(lr);

  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d vg = _mm256_loadu_pd(g + i);
    __m256d vm = _mm256_loadu_pd(m + i);
    __m256d vv = _mm256_loadu_pd(v + i);
    __m256d vp = _mm256_loadu_pd(p + i);

    vm = _mm256_add_pd(_mm256_mul_pd(vb1, vm), _mm256_mul_pd(vb1c, vg));
    vv = _mm256_add_pd(_mm256_mul_pd(vb2, vv),
                       _mm256_mul_pd(vb2c, _mm256_mul_pd(vg, vg)));
    const __m256d mhat = _mm256_div_pd(vm, vbc1);
    const __m256d vhat = _mm256_div_pd(vv, vbc2);
    const __m256d denom = _mm256_add_pd(_mm256_sqrt_pd(vhat), veps);
    const __m256d update =
        _mm256_add_pd(_mm256_div_pd(mhat, denom), _mm256_mul_pd(vwd, vp));
    vp = _mm256_sub_pd(vp, _mm256_mul_pd(vlr, update));

    _mm256_storeu_pd(m + i, vm);
    _mm256_storeu_pd(v + i, vv);
    _mm256_storeu_pd(p + i, vp);
  }
  for (; i < n; ++i) {
    m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
    v[i] = beta2 * v[i] + (1.0 - beta2) * (g[i] * g[i]);
    const double mhat = m[i] / bc1;
    const double vhat = v[i] / bc2;
    const double update = mhat / (std::sqrt(vhat) + eps) + weight_decay * p[i];
    p[i] = p[i] - lr * update;
  }
}

}  // namespace

const Ops& avx2_ops() {
  static const Ops ops = {"avx2", dot_avx2, axpy_avx2, relu_avx2, adamw_avx2};
  return ops;
}

}  // namespace vattr::kernels

#endif  // VATTR_KERNELS_AVX2
