#pragma once

// Signal, noise, signal-to-noise ratio and metric conversion.
//
// Noise is the relative (sample) standard deviation of a model's final n
// checkpoints. Signal is the relative dispersion, (max - min) / mean, of the
// final-checkpoint scores of a population of comparably-trained models.
// Relative measures divide by |mean| and reject |mean| <= kMeanEpsilon.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "signoise/eval_store.hpp"
#include "signoise/series.hpp"

namespace signoise {

inline constexpr double kMeanEpsilon = 1e-12;

enum class SpreadKind {
  rel_dispersion,
  dispersion,  // max - min
  rel_std,
  std,
  variance,
  mean_pairwise_distance,
  rel_mean_pairwise_distance,
  mean_squared_pairwise_distance,
  rel_mean_squared_pairwise_distance,
  iqr,
  quartile_deviation,
  avg_abs_deviation,
  median_abs_deviation,
  rms_deviation,
  gini_coefficient,
  star_discrepancy,
};

std::span<const SpreadKind> all_spread_kinds();
std::string_view to_string(SpreadKind kind);
std::optional<SpreadKind> parse_spread_kind(std::string_view name);
/// True for kinds that divide by the mean.
bool is_relative(SpreadKind kind);

double mean(std::span<const double> values);
/// Standard deviation with the 1/(n-1) normalization.
double sample_std(std::span<const double> values);
/// sample_std / |mean|. Needs >= 2 values and |mean| > kMeanEpsilon.
double rel_std(std::span<const double> values);

/// Quantile with linear interpolation between order statistics.
double quantile(std::span<const double> values, double p);

/// Spread of a set of scores under the chosen measure.
///
///   variance                         (1/n) Σ (c - mean)^2
///   std                              sqrt(Σ (c - mean)^2 / (n-1))
///   mean_pairwise_distance           (1/n^2) Σ_{i,j} |c_i - c_j|
///   mean_squared_pairwise_distance   (1/n^2) Σ_{i,j} (c_i - c_j)^2
///   gini_coefficient                 Σ_{i,j} |c_i - c_j| / (2 n^2 mean)
///   star_discrepancy                 sup_t |F_n(t) - t| on min-max normalized
///                                    scores (1 for a constant vector)
///   iqr / quartile_deviation         Q3 - Q1, (Q3 - Q1) / 2
///   avg/median_abs_deviation         about the mean / median
///   rms_deviation                    sqrt((1/n) Σ (c - mean)^2)
/// rel_* variants divide by |mean| (the squared pairwise one by mean^2).
double spread(std::span<const double> values, SpreadKind kind);

/// (1/T) Σ |U(t) - U(t-1)| - (1/T)(U(T) - U(0)), summed as Σ (|Δ| - Δ) / T
/// so that monotone nondecreasing curves give exactly 0.
double total_variation(std::span<const double> values);
double total_variation(std::span<const Point> series);

enum class NoiseKind { final_n_rel_std, total_variation, seed, data_order };
std::string_view to_string(NoiseKind kind);

struct NoiseEstimate {
  NoiseKind kind = NoiseKind::final_n_rel_std;
  double value = 0.0;
  std::size_t n_used = 0;
  std::vector<std::string> model_ids;
};

NoiseEstimate noise_final_n(std::span<const Point> curve, std::size_t n);
NoiseEstimate noise_final_n(const EvalStore& store, std::string_view model_id,
                            std::string_view benchmark, std::string_view metric, std::size_t n,
                            std::string_view subtask = {});

NoiseEstimate total_variation_noise(const EvalStore& store, std::string_view model_id,
                                    std::string_view benchmark, std::string_view metric,
                                    std::string_view subtask = {});

/// Unweighted mean of per-model final-n noise. Lists every model that is too
/// short when any fails.
double population_noise(const CurveMap& curves, std::span<const std::string> model_ids,
                        std::size_t n);
double population_noise(const EvalStore& store, std::span<const std::string> model_ids,
                        std::string_view benchmark, std::string_view metric, std::size_t n,
                        std::string_view subtask = {});

/// Noise across training runs: mean of each model's final n values, then the
/// relative sample standard deviation of those means.
NoiseEstimate seed_or_order_noise(const CurveMap& curves, std::span<const std::string> model_ids,
                                  std::size_t n, NoiseKind kind = NoiseKind::seed);
NoiseEstimate seed_or_order_noise(const EvalStore& store, std::span<const std::string> model_ids,
                                  std::string_view metric, std::string_view benchmark,
                                  std::size_t n, NoiseKind kind = NoiseKind::seed,
                                  std::string_view subtask = {});

enum class SnrStatus {
  finite,
  infinite,    // noise == 0, signal > 0
  degenerate,  // noise == 0, signal == 0
};

struct SnrReport {
  std::string benchmark;
  std::string metric;
  double signal = 0.0;
  double noise = 0.0;
  double snr = 0.0;  // +inf when infinite, NaN when degenerate
  SnrStatus status = SnrStatus::finite;
  std::vector<std::string> population;
  std::vector<std::string> noise_models;
  std::size_t window_n = 0;
};

/// Sort key: infinite ranks above every finite value, degenerate below all.
double snr_rank_key(const SnrReport& r);

/// Combines a signal and a noise value into the ratio and its status.
SnrReport make_snr(double signal, double noise);

/// Signal from the last point of each population curve, noise averaged over
/// noise_model_ids. benchmark/metric are left empty.
SnrReport snr_from_curves(const CurveMap& curves, std::span<const std::string> population_ids,
                          std::span<const std::string> noise_model_ids, std::size_t n);
SnrReport snr(const EvalStore& store, std::span<const std::string> population_ids,
              std::span<const std::string> noise_model_ids, std::string_view benchmark,
              std::string_view metric, std::size_t n, std::string_view subtask = {});

/// Final-checkpoint values for each model, in the given order.
std::vector<double> final_scores(const CurveMap& curves, std::span<const std::string> model_ids);

/// Curves of the given models for one benchmark/metric. Models without data get
/// an empty series.
CurveMap fetch_curves(const EvalStore& store, std::span<const std::string> model_ids,
                      std::string_view benchmark, std::string_view metric,
                      std::string_view subtask = {});

/// NLL of the gold continuation in bits per UTF-8 byte.
double bits_per_byte(double nll_nats, std::int64_t num_bytes);

enum class BpbAggregation {
  micro,  // Σ nll / (ln 2 · Σ bytes)
  macro,  // mean of per-instance BPB
};

double aggregate_bpb(std::span<const InstanceRecord> records,
                     BpbAggregation how = BpbAggregation::micro);

}  // namespace signoise
