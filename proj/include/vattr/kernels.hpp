// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <string>
#include <string_view>

// Inner-loop arithmetic kernels. A scalar reference implementation is always
// available; SIMD variants (AVX2 on x86-64, NEON on aarch64) are selected at
// runtime and must agree with the scalar kernels: bit-exact for the
// elementwise ops, within rounding tolerance for reductions.
//
// The active backend can be forced with the VATTR_KERNELS environment
// variable ("scalar", "avx2", "neon", "auto").

namespace vattr::kernels {

struct Ops {
  const char* name;

  // sum_i a[i]*b[i]
  double (*dot)(const double* a, const double* b, std::size_t n);

  // y[i] += alpha * x[i]
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);

  // out[i] = max(x[i], 0)
  void (*relu)(const double* x, double* out, std::size_t n);

  // Decoupled-weight-decay Adam update, one parameter block.
  // bc1 = 1 - beta1^t, bc2 = 1 - beta2^t (precomputed by the caller).
  void (*adamw_update)(double* p, const double* g, double* m, double* v,
                       std::size_t n, double lr, double beta1, double beta2,
                       double eps, double weight_decay, double bc1, double bc2);
};

const Ops& scalar();
const Ops& active();

// Force a backend. Returns false (and leaves the selection unchanged) if the
// named backend is unavailable on this machine.
bool select(std::string_view name);

// Names of all backends usable on this machine, "scalar" first.
std::string available();

inline double dot(const double* a, const double* b, std::size_t n) {
  return active().dot(a, b, n);
}
inline void axpy(double alpha, const double* x, double* y, std::size_t n) {
  active().axpy(alpha, x, y, n);
}
inline void relu(const double* x, double* out, std::size_t n) {
  active().relu(x, out, n);
}
inline void adamw_update(double* p, const double* g, double* m, double* v,
                         std::size_t n, double lr, double beta1, double beta2,
                         double eps, double weight_decay, double bc1,
                         double bc2) {
  active().adamw_update(p, g, m, v, n, lr, beta1, beta2, eps, weight_decay,
                        bc1, bc2);
}

}  // namespace vattr::kernels
