#pragma once

// Rank agreement between a small-scale and a large-scale population of models
// trained on the same recipes: decision accuracy, Kendall's tau, Spearman's rho.

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "signoise/eval_store.hpp"
#include "signoise/simd/kernels.hpp"

namespace signoise {

/// Index-aligned scores of the same recipes at two scales.
struct PairedScores {
  std::vector<std::string> labels;
  std::vector<double> small;
  std::vector<double> large;
};

/// Throws DomainError unless lengths match, n >= 2 and labels are unique.
void validate(const PairedScores& ps);

enum class TiePolicy {
  error,        // any tied pair is an error
  half_credit,  // a tied pair counts as half an agreement
};

struct AgreementReport {
  double decision_accuracy = 0.0;
  double kendall_tau = 0.0;  // (C - D) / pairs; tau-a when ties are present
  double spearman_rho = 0.0;
  std::int64_t n_pairs = 0;
  std::int64_t tie_count = 0;
  simd::PairCounts counts;
};

simd::PairCounts pair_counts(const PairedScores& ps);

double decision_accuracy(const PairedScores& ps, TiePolicy policy = TiePolicy::half_credit);
/// (C - D) / pairs. Throws TieError when any pair is tied.
double kendall_tau(const PairedScores& ps);
/// 1 - 6 Σ d^2 / (n (n^2 - 1)) on ranks; with ties, the Pearson correlation of
/// average ranks (0 when one side is entirely tied).
double spearman_rho(const PairedScores& ps);

AgreementReport agreement(const PairedScores& ps);

/// Average ranks (1-based) with ties sharing the mean of their positions.
std::vector<double> average_ranks(std::span<const double> values);

enum class ScoringKind { final, avg_last_k };

struct Scoring {
  ScoringKind kind = ScoringKind::final;
  std::size_t k = 5;
};

/// Score for one curve under a scoring rule.
double score_curve(std::span<const Point> curve, const Scoring& scoring);

/// Pairs small and large models by group label (sorted by label). Small and
/// large sides may use different scoring rules.
PairedScores paired_scores(const EvalStore& store, const CurveMap& curves,
                           std::span<const std::string> small_ids,
                           std::span<const std::string> large_ids, const Scoring& small_scoring,
                           const Scoring& large_scoring);
PairedScores paired_scores_from_store(const EvalStore& store,
                                      std::span<const std::string> small_ids,
                                      std::span<const std::string> large_ids,
                                      std::string_view benchmark, std::string_view metric,
                                      const Scoring& small_scoring, const Scoring& large_scoring,
                                      std::string_view subtask = {});

struct ResampleOptions {
  std::size_t window = 5;
  std::size_t draws = 1000;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  TiePolicy tie_policy = TiePolicy::half_credit;
};

/// Decision accuracy after drawing one of the final `window` checkpoints
/// independently for every small and large model, `draws` times. Draw d uses
/// its own RNG stream, so output does not depend on the thread count.
std::vector<double> resample_decision_accuracy(const EvalStore& store, const CurveMap& curves,
                                               std::span<const std::string> small_ids,
                                               std::span<const std::string> large_ids,
                                               const ResampleOptions& options);
std::vector<double> resample_decision_accuracy(const EvalStore& store,
                                               std::span<const std::string> small_ids,
                                               std::span<const std::string> large_ids,
                                               std::string_view benchmark,
                                               std::string_view metric,
                                               const ResampleOptions& options);

}  // namespace signoise
