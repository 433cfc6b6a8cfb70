#include <cmath>

#include "signoise/simd/kernels.hpp"

namespace signoise::simd::detail {
namespace {

double sum(const double* x, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += x[i];
  return s;
}

double sum_sq_dev(const double* x, std::size_t n, double c) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = x[i] - c;
    s += d * d;
  }
  return s;
}

double sum_abs_dev(const double* x, std::size_t n, double c) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += std::fabs(x[i] - c);
  return s;
}

double pairwise_abs_sum(const double* x, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) s += std::fabs(x[i] - x[j]);
  return s;
}

double pairwise_sq_sum(const double* x, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = x[i] - x[j];
      s += d * d;
    }
  return s;
}

PairCounts count_pairs(const double* a, const double* b, std::size_t n) {
  PairCounts pc;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double da = a[i] - a[j];
      const double db = b[i] - b[j];
      if (da == 0.0 || db == 0.0)
        ++pc.tied;
      else if ((da > 0.0) == (db > 0.0))
        ++pc.concordant;
      else
        ++pc.discordant;
    }
  return pc;
}

}  // namespace

const KernelTable scalar_table{
    Isa::scalar, sum, sum_sq_dev, sum_abs_dev, pairwise_abs_sum, pairwise_sq_sum, count_pairs,
};

}  // namespace signoise::simd::detail
