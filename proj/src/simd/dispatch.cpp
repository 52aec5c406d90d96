#include <atomic>
#include <cstdlib>
#include <cstring>

#include "dlab/simd.hpp"

namespace dlab::simd {

#ifndef DLAB_HAVE_AVX2
const KernelTable* avx2_table() { return nullptr; }
#endif

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(__i386__)
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

namespace {

const KernelTable* initial_table() {
  const char* env = std::getenv("DLAB_SIMD");
  const bool force_scalar = env != nullptr && std::strcmp(env, "scalar") == 0;
  if (!force_scalar && avx2_table() != nullptr && cpu_has_avx2()) return avx2_table();
  return &scalar_table();
}

std::atomic<const KernelTable*>& slot() {
  static std::atomic<const KernelTable*> current{initial_table()};
  return current;
}

}  // namespace

const KernelTable& active() { return *slot().load(std::memory_order_acquire); }

void select(Isa isa) {
  if (isa == Isa::avx2 && avx2_table() != nullptr && cpu_has_avx2()) {
    slot().store(avx2_table(), std::memory_order_release);
  } else {
    slot().store(&scalar_table(), std::memory_order_release);
  }
}

std::string_view name(Isa isa) { return isa == Isa::avx2 ? "avx2" : "scalar"; }

}  // namespace dlab::simd
