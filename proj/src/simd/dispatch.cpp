#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "signoise/simd/kernels.hpp"

namespace signoise::simd {
namespace {

bool cpu_has_avx2() {
#if defined(SIGNOISE_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const KernelTable* initial_table() {
  Isa pick = cpu_has_avx2() ? Isa::avx2 : Isa::scalar;
  if (const char* env = std::getenv("SIGNOISE_SIMD")) {
    const std::string v(env);
    if (v == "scalar") pick = Isa::scalar;
    else if (v == "avx2" && isa_supported(Isa::avx2)) pick = Isa::avx2;
  }
  return &kernels_for(pick);
}

std::atomic<const KernelTable*>& active_slot() {
  static std::atomic<const KernelTable*> slot{initial_table()};
  return slot;
}

}  // namespace

bool isa_supported(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return true;
    case Isa::avx2:
      return cpu_has_avx2();
  }
  return false;
}

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return "scalar";
    case Isa::avx2:
      return "avx2";
  }
  return "unknown";
}

std::vector<Isa> supported_isas() {
  std::vector<Isa> out{Isa::scalar};
  if (isa_supported(Isa::avx2)) out.push_back(Isa::avx2);
  return out;
}

const KernelTable& kernels_for(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return detail::scalar_table;
    case Isa::avx2:
#if defined(SIGNOISE_HAVE_AVX2)
      if (cpu_has_avx2()) return detail::avx2_table;
#endif
      break;
  }
  throw std::invalid_argument("kernel ISA not supported on this CPU: " + std::string(isa_name(isa)));
}

const KernelTable& kernels() { return *active_slot().load(std::memory_order_acquire); }

Isa active_isa() { return kernels().isa; }

void set_active_isa(Isa isa) { active_slot().store(&kernels_for(isa), std::memory_order_release); }

}  // namespace signoise::simd
