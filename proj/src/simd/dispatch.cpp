#include <atomic>
#include <cstdlib>
#include <string>

#include "mrtf/core/error.hpp"
#include "mrtf/simd/kernels.hpp"

namespace mrtf::simd {

namespace {

bool cpu_has_avx2() {
#if defined(MRTF_HAS_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const KernelTable* best_available() {
  if (const char* env = std::getenv("MRTF_SIMD")) {
    auto requested = parse_isa(env);
    if (requested && isa_supported(*requested)) return &kernels_for(*requested);
  }
  if (isa_supported(Isa::avx2)) return &kernels_for(Isa::avx2);
  if (isa_supported(Isa::neon)) return &kernels_for(Isa::neon);
  return &scalar_kernels();
}

std::atomic<const KernelTable*>& active_slot() {
  static std::atomic<const KernelTable*> slot{best_available()};
  return slot;
}

}  // namespace

bool isa_supported(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return true;
    case Isa::avx2:
      return cpu_has_avx2();
    case Isa::neon:
#if defined(MRTF_HAS_NEON)
      return true;
#else
      return false;
#endif
  }
  return false;
}

const KernelTable& kernels_for(Isa isa) {
  if (!isa_supported(isa)) {
    throw ValueError("SIMD variant '" + std::string(isa_name(isa)) + "' is not available on this machine");
  }
  switch (isa) {
#if defined(MRTF_HAS_AVX2)
    case Isa::avx2:
      return avx2_kernels();
#endif
#if defined(MRTF_HAS_NEON)
    case Isa::neon:
      return neon_kernels();
#endif
    default:
      return scalar_kernels();
  }
}

const KernelTable& kernels() { return *active_slot().load(std::memory_order_acquire); }

Isa active_isa() { return kernels().isa; }

void set_active_isa(Isa isa) { active_slot().store(&kernels_for(isa), std::memory_order_release); }

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return "scalar";
    case Isa::avx2:
      return "avx2";
    case Isa::neon:
      return "neon";
  }
  return "unknown";
}

std::optional<Isa> parse_isa(std::string_view name) {
  if (name == "scalar") return Isa::scalar;
  if (name == "avx2") return Isa::avx2;
  if (name == "neon") return Isa::neon;
  return std::nullopt;
}

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DimensionError("dot operand length", a.size(), b.size());
  return kernels().dot(a.data(), b.data(), a.size());
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  if (x.size() != y.size()) throw DimensionError("axpy operand length", y.size(), x.size());
  kernels().axpy(alpha, x.data(), y.data(), x.size());
}

void scale(double alpha, std::span<double> y) { kernels().scale(alpha, y.data(), y.size()); }

double squared_norm(std::span<const double> x) { return kernels().dot(x.data(), x.data(), x.size()); }

}  // namespace mrtf::simd
