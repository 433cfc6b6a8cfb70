#pragma once

// Seeded generators with known ground truth: training curves, two-scale
// recipe populations, scaling ladders, and a complete demo dataset.

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "signoise/eval_store.hpp"
#include "signoise/scaling_law.hpp"
#include "signoise/series.hpp"

namespace signoise::synth {

enum class NoiseMode {
  multiplicative,  // trend · (1 + ε)
  additive,        // trend + ε
};

struct CurveConfig {
  double asymptote = 0.6;
  double amplitude = 0.3;
  double decay_exponent = 0.5;
  double noise_rel_std = 0.0;
  std::size_t steps = 50;
  std::uint64_t rng_seed = 0;
  NoiseMode noise_mode = NoiseMode::multiplicative;
  std::int64_t step_stride = 1;
};

/// asymptote - amplitude · (t + 1)^(-decay) at checkpoint index t.
double curve_trend(const CurveConfig& cfg, std::size_t t);

/// Trend with seeded Gaussian noise, ε ~ N(0, noise_rel_std); step = t · stride.
Series generate_curve(const CurveConfig& cfg);

/// Rows ready for a StoreBuilder.
struct StoreFragment {
  std::vector<ModelMeta> models;
  std::vector<Measurement> measurements;
  std::vector<InstanceRecord> instances;

  /// Appends another fragment. Models already present (same id) must be identical.
  void merge(StoreFragment other);
  EvalStore build() const;
};

struct PopulationScale {
  std::string suffix;
  double params = 0.0;
  double tokens = 0.0;
  double asymptote_gain = 1.0;  // must be > 0 to keep the ordering
  double asymptote_offset = 0.0;
};

struct PopulationSpec {
  std::string benchmark = "synthetic";
  std::string subtask;
  std::string metric = "primary";
  std::vector<PopulationScale> scales{
      {"small", 1.5e8, 1.5e8 * 100, 0.8, 0.0},
      {"large", 1.0e9, 1.0e9 * 100, 1.0, 0.0},
  };
};

struct GeneratedPopulation {
  StoreFragment fragment;
  /// ids_by_scale[s][i] is the model for labels[i] at scale s.
  std::vector<std::vector<std::string>> ids_by_scale;
  /// Labels ordered by descending asymptote (the true ranking).
  std::vector<std::string> true_ranking;
};

/// One curve per label at every scale; models are "<label>-<suffix>" with
/// group = label. Curve seeds are derived from each config's seed and the
/// scale index.
GeneratedPopulation generate_population(std::span<const CurveConfig> configs,
                                        std::span<const std::string> labels,
                                        const PopulationSpec& spec = {});

struct Ladder {
  std::vector<ScalingPoint> points;
  ScalingPoint target;  // noiseless truth, not part of `points`
};

std::vector<std::pair<double, double>> grid_product(std::span<const double> params,
                                                    std::span<const double> tokens);

/// Losses from the true power law, each multiplied by (1 + ε) with
/// ε ~ N(0, noise_rel_std); metrics from the true sigmoid of that loss.
Ladder generate_scaling_ladder(const PowerLawFit& true_power, const SigmoidFit& true_sigmoid,
                               std::span<const std::pair<double, double>> grid,
                               std::pair<double, double> target, double noise_rel_std,
                               std::uint64_t rng_seed);

struct DemoOptions {
  std::uint64_t seed = 0;
  std::size_t recipes = 10;
  std::size_t steps = 40;
  std::size_t subtasks = 12;
  std::size_t clean_subtasks = 4;
  std::size_t instances = 40;
};

/// Full dataset exercising every command: a two-scale recipe population on
/// three benchmarks (one with subtasks), primary and bpb metrics, a scaling
/// ladder with a large target model, and instance-level records.
StoreFragment generate_demo_dataset(const DemoOptions& options = {});

}  // namespace signoise::synth
