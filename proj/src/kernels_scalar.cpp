// SPDX-License-Identifier: Apache-2.0
#include "vattr/kernels.hpp"

#include <cmath>

// Reference kernels. Plain sequential loops; the SIMD backends are checked
// against these in tests/test_kernels.cpp.

namespace vattr::kernels {

namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    acc += a[i] * b[i];
  }
  return acc;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = y[i] + alpha * x[i];
  }
}

void relu_scalar(const double* x, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = x[i] > 0.0 ? x[i] : 0.0;
  }
}

void adamw_scalar(double* p, const double* g, double* m, double* v,
                  std::size_t n, double lr, double beta1, double beta2,
                  double eps, double weight_decay, double bc1, double bc2) {
  for (std::size_t i = 0; i < n; ++i) {
    m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
    v[i] = beta2 * v[i] + (1.0 - beta2) * (g[i] * g[i]);
    const double mhat = m[i] / bc1;
    const double vhat = v[i] / bc2;
    const double update = mhat / (std::sqrt(vhat) + eps) + weight_decay * p[i];
    p[i] = p[i] - lr * update;
  }
}

}  // namespace

const Ops& scalar() {
  static const Ops ops = {"scalar", dot_scalar, axpy_scalar, relu_scalar,
                          adamw_scalar};
  return ops;
}

}  // namespace vattr::kernels
