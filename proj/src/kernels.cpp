#include "evoflow/kernels.hpp"

#include "evoflow/errors.hpp"

namespace evoflow::kernels {
namespace {

SimdMode g_mode = SimdMode::Auto;
const KernelTable* g_active = nullptr;

const KernelTable* resolve(SimdMode mode) {
  switch (mode) {
    case SimdMode::Scalar:
      return &scalar_table();
    case SimdMode::Avx2: {
      const KernelTable* t = avx2_table();
      if (!t) throw validation_error("kernels: AVX2 requested but not available");
      return t;
    }
    case SimdMode::Auto:
    default: {
      const KernelTable* t = avx2_table();
      return t ? t : &scalar_table();
    }
  }
}

}  // namespace

void set_simd_mode(SimdMode mode) {
  g_active = resolve(mode);
  g_mode = mode;
}

SimdMode simd_mode() { return g_mode; }

const KernelTable& active_table() {
  if (!g_active) g_active = resolve(g_mode);
  return *g_active;
}

std::string active_variant() {
  return &active_table() == &scalar_table() ? "scalar" : "avx2";
}

}  // namespace evoflow::kernels
