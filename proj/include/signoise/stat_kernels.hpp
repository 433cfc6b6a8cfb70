#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>

namespace signoise {

/// ln Γ(x) for x > 0 (Lanczos approximation, g = 7, 9 terms).
double log_gamma(double x);

/// Regularized lower incomplete gamma P(s, x), s > 0, x >= 0. Series for
/// x < s + 1, Lentz continued fraction for the upper tail otherwise.
double reg_gamma_lower(double s, double x);

/// P(χ²_ν < x).
double chi_squared_cdf(double x, double dof);

/// Sample std within k·σ of σ with confidence alpha.
struct MinCheckpointQuery {
  double k = 1.0;
  double alpha = 0.95;
};

/// P(|s_n - σ| < kσ) for normal data: P((1-k)²(n-1) < χ²_{n-1} < (1+k)²(n-1)),
/// with the lower bound 0 once k >= 1.
double within_tolerance_probability(std::size_t n, double k);

inline constexpr std::size_t kMinCheckpointCap = 1000000;

/// Smallest n >= 2 with within_tolerance_probability(n, k) >= alpha, found by
/// scanning n upward. nullopt when no n <= kMinCheckpointCap qualifies.
std::optional<std::size_t> min_checkpoints(const MinCheckpointQuery& q);

struct ToleranceEstimate {
  double likelihood = 0.0;
  bool degenerate = false;  // σ_pop == 0
};

/// Fraction of `trials` random n-subsets (without replacement) of `window`
/// whose sample std is within k·σ_pop of σ_pop, σ_pop being the sample std of
/// the whole window. Trial t draws from its own RNG stream.
ToleranceEstimate empirical_within_tolerance(std::span<const double> window, std::size_t n,
                                             double k, std::size_t trials, std::uint64_t seed,
                                             unsigned threads = 1);

struct Correlation {
  double r = 0.0;
  double r_squared = 0.0;
};

/// Pearson product-moment correlation. Needs >= 3 points and nonzero variance.
Correlation pearson_r(std::span<const double> xs, std::span<const double> ys);

}  // namespace signoise
