#pragma once

// Two-stage downstream scaling law: task loss L(N, D) = A/N^alpha + B/D^beta + E
// fit with a Huber objective on log residuals, then a sigmoid
// U(L) = a / (1 + exp(-k (L - L0))) + b mapping loss to the downstream metric.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "signoise/agreement.hpp"
#include "signoise/eval_store.hpp"

namespace signoise {

struct ScalingPoint {
  double params = 0.0;
  double tokens = 0.0;
  double loss = 0.0;
  std::optional<double> metric;
};

struct PowerLawFit {
  double A = 0.0;
  double B = 0.0;
  double E = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
  double fit_loss = 0.0;
  bool converged = true;
};

struct SigmoidFit {
  double a = 0.0;
  double b = 0.0;
  double k = 0.0;
  double L0 = 0.0;
  double fit_loss = 0.0;
  bool converged = true;
};

struct ScalingChain {
  PowerLawFit power;
  SigmoidFit sigmoid;
};

/// ½r² for |r| <= delta, delta (|r| - ½delta) beyond.
double huber(double residual, double delta);

/// Starting points for the power-law fit. E starts are fractions of the
/// smallest observed loss.
struct PowerLawGrid {
  std::vector<double> log_a{0, 5, 10, 15, 20};
  std::vector<double> log_b{0, 5, 10, 15, 20};
  std::vector<double> e_fraction{0.0, 0.5, 1.0};
  std::vector<double> alpha{0.2, 0.5, 0.8};
  std::vector<double> beta{0.2, 0.5, 0.8};

  std::size_t size() const {
    return log_a.size() * log_b.size() * e_fraction.size() * alpha.size() * beta.size();
  }
};

struct PowerLawFitOptions {
  double delta = 1e-3;
  PowerLawGrid grid;
  /// Simplex budget spent on every grid start before the best ones are polished.
  std::size_t screen_evaluations = 600;
  /// Number of screened candidates refined to full convergence.
  std::size_t polish_candidates = 5;
  double ftol = 1e-10;
  std::size_t max_evaluations = 100000;
};

/// Σ huber(log L_pred - log loss, delta) at the given parameters.
double power_law_objective(const PowerLawFit& fit, std::span<const ScalingPoint> points,
                           double delta);

PowerLawFit fit_power_law(std::span<const ScalingPoint> points,
                          const PowerLawFitOptions& options = {});

double predict_loss(const PowerLawFit& fit, double params, double tokens);

/// Least-squares sigmoid fit of metric against loss. Needs >= 4 pairs.
SigmoidFit fit_sigmoid(std::span<const std::pair<double, double>> loss_metric);

double predict_metric(const SigmoidFit& fit, double loss);
double predict_metric(const ScalingChain& chain, double params, double tokens);

/// |predicted - actual| / |actual|.
double prediction_error(double predicted, double actual);

/// True when the prediction error is at or below the target's noise.
inline bool within_noise(double rel_error, double noise_bound) { return rel_error <= noise_bound; }

/// Relative std of the target's final n checkpoints.
double target_noise_bound(const EvalStore& store, std::string_view target_model,
                          std::string_view benchmark, std::string_view metric,
                          std::size_t n = 30);

/// Points for a ladder of models: loss from `loss_metric`, downstream score
/// from `metric`, each scored with `scoring` (final, or the average of the
/// last k checkpoints).
std::vector<ScalingPoint> ladder_points(const EvalStore& store,
                                        std::span<const std::string> ladder_ids,
                                        std::string_view benchmark, std::string_view loss_metric,
                                        std::string_view metric, const Scoring& scoring);

/// Power law on (N, D, loss) and sigmoid on the (loss, metric) pairs present.
ScalingChain fit_chain(std::span<const ScalingPoint> points,
                       const PowerLawFitOptions& options = {});

struct ScalingFitReport {
  std::string benchmark;
  std::string metric;
  ScalingChain chain;
  double predicted = 0.0;
  double actual = 0.0;
  double rel_error = 0.0;
  double target_noise = 0.0;
  bool within_noise = false;
};

struct ScalingFitRequest {
  std::vector<std::string> ladder_ids;
  std::string target_id;
  std::string benchmark;
  std::string loss_metric = "bpb";
  std::string metric = "primary";
  Scoring ladder_scoring;  // avg_last_k to smooth the ladder
  Scoring target_scoring;
  std::size_t target_window = 30;
  PowerLawFitOptions fit_options;
};

ScalingFitReport scaling_fit_report(const EvalStore& store, const ScalingFitRequest& request);

}  // namespace signoise
