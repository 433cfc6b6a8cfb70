#include <immintrin.h>

#include <bit>
#include <cmath>

#include "signoise/simd/kernels.hpp"

namespace signoise::simd::detail {
namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

inline __m256d vabs(__m256d v) {
  return _mm256_andnot_pd(_mm256_set1_pd(-0.0), v);
}

double sum(const double* x, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_add_pd(acc0, _mm256_loadu_pd(x + i));
    acc1 = _mm256_add_pd(acc1, _mm256_loadu_pd(x + i + 4));
  }
  for (; i + 4 <= n; i += 4) acc0 = _mm256_add_pd(acc0, _mm256_loadu_pd(x + i));
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) s += x[i];
  return s;
}

double sum_sq_dev(const double* x, std::size_t n, double c) {
  const __m256d vc = _mm256_set1_pd(c);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(x + i), vc);
    acc = _mm256_fmadd_pd(d, d, acc);
  }
  double s = hsum(acc);
  for (; i < n; ++i) {
    const double d = x[i] - c;
    s += d * d;
  }
  return s;
}

double sum_abs_dev(const double* x, std::size_t n, double c) {
  const __m256d vc = _mm256_set1_pd(c);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, vabs(_mm256_sub_pd(_mm256_loadu_pd(x + i), vc)));
  double s = hsum(acc);
  for (; i < n; ++i) s += std::fabs(x[i] - c);
  return s;
}

double pairwise_abs_sum(const double* x, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  double tail = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const __m256d xi = _mm256_set1_pd(x[i]);
    std::size_t j = i + 1;
    for (; j + 4 <= n; j += 4) acc = _mm256_add_pd(acc, vabs(_mm256_sub_pd(_mm256_loadu_pd(x + j), xi)));
    for (; j < n; ++j) tail += std::fabs(x[i] - x[j]);
  }
  return hsum(acc) + tail;
}

double pairwise_sq_sum(const double* x, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  double tail = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const __m256d xi = _mm256_set1_pd(x[i]);
    std::size_t j = i + 1;
    for (; j + 4 <= n; j += 4) {
      const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(x + j), xi);
      acc = _mm256_fmadd_pd(d, d, acc);
    }
    for (; j < n; ++j) {
      const double d = x[i] - x[j];
      tail += d * d;
    }
  }
  return hsum(acc) + tail;
}

PairCounts count_pairs(const double* a, const double* b, std::size_t n) {
  PairCounts pc;
  for (std::size_t i = 0; i < n; ++i) {
    const __m256d ai = _mm256_set1_pd(a[i]);
    const __m256d bi = _mm256_set1_pd(b[i]);
    std::size_t j = i + 1;
    for (; j + 4 <= n; j += 4) {
      const __m256d aj = _mm256_loadu_pd(a + j);
      const __m256d bj = _mm256_loadu_pd(b + j);
      const __m256d a_gt = _mm256_cmp_pd(ai, aj, _CMP_GT_OQ);
      const __m256d a_lt = _mm256_cmp_pd(ai, aj, _CMP_LT_OQ);
      const __m256d b_gt = _mm256_cmp_pd(bi, bj, _CMP_GT_OQ);
      const __m256d b_lt = _mm256_cmp_pd(bi, bj, _CMP_LT_OQ);
      const __m256d conc = _mm256_or_pd(_mm256_and_pd(a_gt, b_gt), _mm256_and_pd(a_lt, b_lt));
      const __m256d disc = _mm256_or_pd(_mm256_and_pd(a_gt, b_lt), _mm256_and_pd(a_lt, b_gt));
      const int c = std::popcount(static_cast<unsigned>(_mm256_movemask_pd(conc)));
      const int d = std::popcount(static_cast<unsigned>(_mm256_movemask_pd(disc)));
      pc.concordant += c;
      pc.discordant += d;
      pc.tied += 4 - c - d;
    }
    for (; j < n; ++j) {
      const double da = a[i] - a[j];
      const double db = b[i] - b[j];
      if (da == 0.0 || db == 0.0)
        ++pc.tied;
      else if ((da > 0.0) == (db > 0.0))
        ++pc.concordant;
      else
        ++pc.discordant;
    }
  }
  return pc;
}

}  // namespace

const KernelTable avx2_table{
    Isa::avx2, sum, sum_sq_dev, sum_abs_dev, pairwise_abs_sum, pairwise_sq_sum, count_pairs,
};

}  // namespace signoise::simd::detail
