// SPDX-License-Identifier: Apache-2.0
#include "vattr/kernels.hpp"

#if defined(VATTR_KERNELS_NEON)

#include <arm_neon.h>

#include <cmath>

// NEON kernels, 2 doubles per lane. Same expression trees as the scalar
// reference (no fused multiply-add) so elementwise results stay bit-equal.

namespace vattr::kernels {

namespace {

double dot_neon(const double* a, const double* b, std::size_t n) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    acc = vaddq_f64(acc, vmulq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
  }
  double sum = vgetq_lane_f64(acc, 0) + vgetq_lane_f64(acc, 1);
  for (; i < n; ++i) {
    sum += a[i] * b[i];
  }
  return sum;
}

void axpy_neon(double alpha, const double* x, double* y, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(alpha);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t vx = vld1q_f64(x + i);
    const float64x2_t vy = vld1q_f64(y + i);
    vst1q_f64(y + i, vaddq_f64(vy, vmulq_f64(va, vx)));
  }
  for (; i < n; ++i) {
    y[i] = y[i] + alpha * x[i];
  }
}

void relu_neon(const double* x, double* out, std::size_t n) {
  const float64x2_t zero = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    vst1q_f64(out + i, vmaxq_f64(vld1q_f64(x + i), zero));
  }
  for (; i < n; ++i) {
    out[i] = x[i] > 0.0 ? x[i] : 0.0;
  }
}

void adamw_neon(double* p, const double* g, double* m, double* v,
                std::size_t n, double lr, double beta1, double beta2,
                double eps, double weight_decay, double bc1, double bc2) {
  const float64x2_t vb1 = vdupq_n_f64(beta1);
  const float64x2_t vb1c = vdupq_n_f64(1.0 - beta1);
  const float64x2_t vb2 = vdupq_n_f64(beta2);
  const float64x2_t vb2c = vdupq_n_f64(1.0 - beta2);
  const float64x2_t vbc1 = vdupq_n_f64(bc1);
  const float64x2_t vbc2 = vdupq_n_f64(bc2);
  const float64x2_t veps = vdupq_n_f64(eps);
  const float64x2_t vwd = vdupq_n_f64(weight_decay);
  const float64x2_t vlr = vdupq_n_f64(lr);

  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t vg = vld1q_f64(g + i);
    float64x2_t vm = vld1q_f64(m + i);
    float64x2_t vv = vld1q_f64(v + i);
    float64x2_t vp = vld1q_f64(p + i);

    vm = vaddq_f64(vmulq_f64(vb1, vm), vmulq_f64(vb1c, vg));
    vv = vaddq_f64(vmulq_f64(vb2, vv), vmulq_f64(vb2c, vmulq_f64(vg, vg)));
    const float64x2_t mhat = vdivq_f64(vm, vbc1);
    const float64x2_t vhat = vdivq_f64(vv, vbc2);
    const float64x2_t denom = vaddq_f64(vsqrtq_f64(vhat), veps);
    const float64x2_t update =
        vaddq_f64(vdivq_f64(mhat, denom), vmulq_f64(vwd, vp));
    vp = vsubq_f64(vp, vmulq_f64(vlr, update));

    vst1q_f64(m + i, vm);
    vst1q_f64(v + i, vv);
    vst1q_f64(p + i, vp);
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

const Ops& neon_ops() {
  static const Ops ops = {"neon", dot_neon, axpy_neon, relu_neon, adamw_neon};
  return ops;
}

}  // namespace vattr::kernels

#endif  // VATTR_KERNELS_NEON
