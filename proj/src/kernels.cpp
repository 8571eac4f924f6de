// SPDX-License-Identifier: Apache-2.0
#include "vattr/kernels.hpp"

#include <cstdlib>

namespace vattr::kernels {

#if defined(VATTR_KERNELS_AVX2)
const Ops& avx2_ops();
#endif
#if defined(VATTR_KERNELS_NEON)
const Ops& neon_ops();
#endif

namespace {

bool avx2_usable() {
#if defined(VATTR_KERNELS_AVX2) && defined(__GNUC__)
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

bool neon_usable() {
#if defined(VATTR_KERNELS_NEON)
  return true;  // mandatory on aarch64
#else
  return false;
#endif
}

const Ops* best_available() {
#if defined(VATTR_KERNELS_AVX2)
  if (avx2_usable()) return &avx2_ops();
#endif
#if defined(VATTR_KERNELS_NEON)
  if (neon_usable()) return &neon_ops();
#endif
  return &scalar();
}

const Ops* lookup(std::string_view name) {
  if (name == "scalar") return &scalar();
  if (name == "auto") return best_available();
#if defined(VATTR_KERNELS_AVX2)
  if (name == "avx2" && avx2_usable()) return &avx2_ops();
#endif
#if defined(VATTR_KERNELS_NEON)
  if (name == "neon" && neon_usable()) return &neon_ops();
#endif
  return nullptr;
}

const Ops* initial_selection() {
  if (const char* env = std::getenv("VATTR_KERNELS")) {
    if (const Ops* ops = lookup(env)) return ops;
  }
  return best_available();
}

const Ops*& current() {
  static const Ops* ops = initial_selection();
  return ops;
}

}  // namespace

const Ops& active() { return *current(); }

bool select(std::string_view name) {
  const Ops* ops = lookup(name);
  if (!ops) return false;
  current() = ops;
  return true;
}

std::string available() {
  std::string names = "scalar";
  if (avx2_usable()) names += ",avx2";
  if (neon_usable()) names += ",neon";
  return names;
}

}  // namespace vattr::kernels
