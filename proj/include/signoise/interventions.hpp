#pragma once

// Interventions that raise a benchmark's SNR (subtask filtering, checkpoint
// averaging, EMA smoothing, instance subsampling, metric swaps) and the
// harnesses that measure their effect.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "signoise/agreement.hpp"
#include "signoise/eval_store.hpp"
#include "signoise/metrics.hpp"
#include "signoise/scaling_law.hpp"
#include "signoise/series.hpp"

namespace signoise {

struct SubtaskFilterOptions {
  std::string metric = "primary";
  std::size_t window_n = 5;
  std::vector<std::string> population_ids;
  std::vector<std::string> noise_ids;  // defaults to population_ids
  // Decision accuracy is reported when both are set.
  std::vector<std::string> small_ids;
  std::vector<std::string> large_ids;
  Scoring small_scoring;
  Scoring large_scoring;
  // Target noise is reported when set.
  std::optional<std::string> target_id;
  std::size_t target_window = 30;
  // Random-order baseline; 0 trials disables it.
  std::size_t baseline_trials = 10;
  std::uint64_t seed = 0;
  unsigned threads = 1;
};

struct SubtaskScore {
  std::string subtask;
  SnrReport snr;
  bool degenerate = false;
};

struct PrefixReport {
  std::size_t prefix_len = 0;
  std::string subtask_added;
  SnrReport snr;
  std::optional<double> decision_accuracy;
  std::optional<double> target_noise;
  double baseline_mean_snr = 0.0;
  double baseline_std_snr = 0.0;
};

struct SubtaskFilterTrace {
  std::string benchmark;
  std::string metric;
  std::vector<SubtaskScore> ordered;  // descending SNR, degenerate last
  std::vector<PrefixReport> prefixes;  // prefix_len 1..K
  bool has_baseline = false;
  bool baseline_std_by_convention = false;  // one trial: std reported as 0

  std::vector<std::string> ordered_subtasks() const;
  /// Prefix length with the highest aggregate SNR (first one on ties).
  std::size_t best_prefix() const;
};

struct BaselineResult {
  std::vector<double> mean;  // index k-1 for prefix length k
  std::vector<double> std;
  bool std_by_convention = false;
};

/// SNR of the macro-average over a set of subtasks.
SnrReport subtask_set_snr(const EvalStore& store, std::string_view benchmark,
                          std::span<const std::string> subtasks,
                          const SubtaskFilterOptions& options);

SubtaskFilterTrace greedy_subtask_filter(const EvalStore& store, std::string_view benchmark,
                                         const SubtaskFilterOptions& options);

/// Prefix SNRs over `trials` random subtask orders. Trial t shuffles with
/// Rng::stream(seed, t).
BaselineResult random_order_baseline(const EvalStore& store, std::string_view benchmark,
                                     std::span<const std::string> subtasks,
                                     const SubtaskFilterOptions& options);

/// Mean of the final k values.
double checkpoint_average(std::span<const Point> series, std::size_t k);

/// y0 = x0, y_t = alpha · x_t + (1 - alpha) · y_{t-1}; steps kept.
Series ema(std::span<const Point> series, double alpha);

enum class Smoothing { none, ema };

/// Decision accuracy between each model's score at `step` (the last checkpoint
/// at or before it, optionally EMA-smoothed) and its final score.
double early_stop_decision_accuracy(const EvalStore& store, std::span<const std::string> model_ids,
                                    std::string_view benchmark, std::string_view metric,
                                    std::int64_t step, Smoothing smoothing = Smoothing::none,
                                    double alpha = 0.1, std::string_view subtask = {});

/// Per-(model, step) aggregate over a fixed random subset of m instances shared
/// by every model and checkpoint. metric is "primary" (mean primary_score) or
/// "bpb" (micro-averaged bits per byte).
std::vector<Measurement> subsample_instances(const EvalStore& store, std::string_view benchmark,
                                             std::string_view metric, std::size_t m,
                                             std::uint64_t seed);

/// Same aggregate over every instance.
std::vector<Measurement> aggregate_instances(const EvalStore& store, std::string_view benchmark,
                                             std::string_view metric);

/// Distinct instance keys for a benchmark ("subtask/instance_id" when a
/// subtask is set), sorted.
std::vector<std::string> instance_keys(const EvalStore& store, std::string_view benchmark);

struct MetricComparisonOptions {
  std::vector<std::string> population_ids;
  std::vector<std::string> noise_ids;  // defaults to population_ids
  std::size_t window_n = 5;
  std::vector<std::string> small_ids;
  std::vector<std::string> large_ids;
  Scoring small_scoring;
  Scoring large_scoring;
  /// Scaling error is reported when ladder_ids and target_id are set; the
  /// request's metric is replaced by each compared metric.
  std::optional<ScalingFitRequest> scaling;
};

struct MetricReport {
  std::string metric;
  SnrReport snr;
  std::optional<double> decision_accuracy;
  std::optional<ScalingFitReport> scaling;
};

struct MetricComparison {
  std::string benchmark;
  MetricReport a;
  MetricReport b;
};

MetricComparison metric_comparison(const EvalStore& store, std::string_view benchmark,
                                   const MetricComparisonOptions& options,
                                   std::string_view metric_a = "primary",
                                   std::string_view metric_b = "bpb");

}  // namespace signoise
