#pragma once

// Data-parallel reductions used by the spread, noise and rank-agreement code.
//
// Every kernel has a portable scalar reference and, where the CPU supports
// it, a vectorized variant. The active table is picked once at first use
// from CPU features; SIGNOISE_SIMD=scalar|avx2 in the environment or
// set_active_isa() overrides it. Floating-point reductions may differ from
// the scalar reference in the last bits (summation order); pair counts are
// exact on every ISA.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace signoise::simd {

enum class Isa { scalar, avx2 };

struct PairCounts {
  std::int64_t concordant = 0;
  std::int64_t discordant = 0;
  std::int64_t tied = 0;

  std::int64_t total() const { return concordant + discordant + tied; }
  friend bool operator==(const PairCounts&, const PairCounts&) = default;
};

struct KernelTable {
  Isa isa;
  double (*sum)(const double* x, std::size_t n);
  /// Σ (x_i - center)^2
  double (*sum_sq_dev)(const double* x, std::size_t n, double center);
  /// Σ |x_i - center|
  double (*sum_abs_dev)(const double* x, std::size_t n, double center);
  /// Σ_{i<j} |x_i - x_j|
  double (*pairwise_abs_sum)(const double* x, std::size_t n);
  /// Σ_{i<j} (x_i - x_j)^2
  double (*pairwise_sq_sum)(const double* x, std::size_t n);
  /// Over unordered pairs i<j: concordant when sign(a_i-a_j) == sign(b_i-b_j) != 0,
  /// tied when either difference is zero.
  PairCounts (*count_pairs)(const double* a, const double* b, std::size_t n);
};

bool isa_supported(Isa isa);
std::string_view isa_name(Isa isa);
std::vector<Isa> supported_isas();

/// Table for a specific ISA; throws std::invalid_argument if unsupported.
const KernelTable& kernels_for(Isa isa);

/// Currently active table.
const KernelTable& kernels();
Isa active_isa();
void set_active_isa(Isa isa);

inline double sum(std::span<const double> x) { return kernels().sum(x.data(), x.size()); }
inline double sum_sq_dev(std::span<const double> x, double c) {
  return kernels().sum_sq_dev(x.data(), x.size(), c);
}
inline double sum_abs_dev(std::span<const double> x, double c) {
  return kernels().sum_abs_dev(x.data(), x.size(), c);
}
inline double pairwise_abs_sum(std::span<const double> x) {
  return kernels().pairwise_abs_sum(x.data(), x.size());
}
inline double pairwise_sq_sum(std::span<const double> x) {
  return kernels().pairwise_sq_sum(x.data(), x.size());
}
inline PairCounts count_pairs(std::span<const double> a, std::span<const double> b) {
  return kernels().count_pairs(a.data(), b.data(), a.size());
}

namespace detail {
extern const KernelTable scalar_table;
#if defined(SIGNOISE_HAVE_AVX2)
extern const KernelTable avx2_table;
#endif
}  // namespace detail

}  // namespace signoise::simd
