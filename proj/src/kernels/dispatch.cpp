#include <atomic>
#include <cstdlib>
#include <string>

#include "kernel_variants.hpp"

namespace risdelay::kernels {
namespace {

const KernelTable* best_available() {
  if (const KernelTable* t = avx2_table()) return t;
  if (const KernelTable* t = neon_table()) return t;
  return &scalar_table();
}

const KernelTable* by_name(std::string_view name) {
  if (name == "scalar") return &scalar_table();
  if (name == "avx2") return avx2_table();
  if (name == "neon") return neon_table();
  if (name == "auto" || name.empty()) return best_available();
  return nullptr;
}

const KernelTable* initial_choice() {
  if (const char* env = std::getenv("RISDELAY_SIMD")) {
    if (const KernelTable* t = by_name(env)) return t;
  }
  return best_available();
}

std::atomic<const KernelTable*>& current() {
  static std::atomic<const KernelTable*> table{initial_choice()};
  return table;
}

}  // namespace

const KernelTable* avx2_table() {
#if defined(RISDELAY_HAVE_AVX2)
  static const bool supported = [] {
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  }();
  return supported ? &detail::avx2_table_impl() : nullptr;
#else
  return nullptr;
#endif
}

const KernelTable* neon_table() {
#if defined(RISDELAY_HAVE_NEON)
  return &detail::neon_table_impl();  // NEON is baseline on AArch64
#else
  return nullptr;
#endif
}

const KernelTable& active() { return *current().load(std::memory_order_acquire); }

bool select(std::string_view name) {
  const KernelTable* t = by_name(name);
  if (t == nullptr) return false;
  current().store(t, std::memory_order_release);
  return true;
}

}  // namespace risdelay::kernels
