#include "signoise/metrics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

#include "signoise/errors.hpp"
#include "signoise/simd/kernels.hpp"

namespace signoise {

namespace {

constexpr std::array kAllKinds{
    SpreadKind::rel_dispersion,
    SpreadKind::dispersion,
    SpreadKind::rel_std,
    SpreadKind::std,
    SpreadKind::variance,
    SpreadKind::mean_pairwise_distance,
    SpreadKind::rel_mean_pairwise_distance,
    SpreadKind::mean_squared_pairwise_distance,
    SpreadKind::rel_mean_squared_pairwise_distance,
    SpreadKind::iqr,
    SpreadKind::quartile_deviation,
    SpreadKind::avg_abs_deviation,
    SpreadKind::median_abs_deviation,
    SpreadKind::rms_deviation,
    SpreadKind::gini_coefficient,
    SpreadKind::star_discrepancy,
};

void require_at_least(std::span<const double> values, std::size_t n, std::string_view what) {
  if (values.size() < n)
    throw DomainError(std::string(what) + " needs at least " + std::to_string(n) +
                      " values, got " + std::to_string(values.size()));
}

double checked_abs_mean(std::span<const double> values, std::string_view what) {
  const double m = mean(values);
  if (!(std::fabs(m) > kMeanEpsilon))
    throw DomainError(std::string(what) + ": mean is too close to zero for a relative measure");
  return std::fabs(m);
}

double star_discrepancy(std::span<const double> values) {
  std::vector<double> u(values.begin(), values.end());
  std::sort(u.begin(), u.end());
  const double lo = u.front();
  const double range = u.back() - lo;
  for (double& x : u) x = range > 0 ? (x - lo) / range : 0.0;
  const double n = static_cast<double>(u.size());
  double d = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double above = static_cast<double>(i + 1) / n - u[i];
    const double below = u[i] - static_cast<double>(i) / n;
    d = std::max({d, above, below});
  }
  return d;
}

}  // namespace

std::span<const SpreadKind> all_spread_kinds() { return kAllKinds; }

std::string_view to_string(SpreadKind kind) {
  switch (kind) {
    case SpreadKind::rel_dispersion: return "rel_dispersion";
    case SpreadKind::dispersion: return "dispersion";
    case SpreadKind::rel_std: return "rel_std";
    case SpreadKind::std: return "std";
    case SpreadKind::variance: return "variance";
    case SpreadKind::mean_pairwise_distance: return "mean_pairwise_distance";
    case SpreadKind::rel_mean_pairwise_distance: return "rel_mean_pairwise_distance";
    case SpreadKind::mean_squared_pairwise_distance: return "mean_squared_pairwise_distance";
    case SpreadKind::rel_mean_squared_pairwise_distance: return "rel_mean_squared_pairwise_distance";
    case SpreadKind::iqr: return "iqr";
    case SpreadKind::quartile_deviation: return "quartile_deviation";
    case SpreadKind::avg_abs_deviation: return "avg_abs_deviation";
    case SpreadKind::median_abs_deviation: return "median_abs_deviation";
    case SpreadKind::rms_deviation: return "rms_deviation";
    case SpreadKind::gini_coefficient: return "gini_coefficient";
    case SpreadKind::star_discrepancy: return "star_discrepancy";
  }
  return "unknown";
}

std::optional<SpreadKind> parse_spread_kind(std::string_view name) {
  for (auto k : kAllKinds)
    if (to_string(k) == name) return k;
  return std::nullopt;
}

bool is_relative(SpreadKind kind) {
  switch (kind) {
    case SpreadKind::rel_dispersion:
    case SpreadKind::rel_std:
    case SpreadKind::rel_mean_pairwise_distance:
    case SpreadKind::rel_mean_squared_pairwise_distance:
    case SpreadKind::gini_coefficient:
      return true;
    default:
      return false;
  }
}

double mean(std::span<const double> values) {
  if (values.empty()) throw DomainError("mean of an empty set");
  const double n = static_cast<double>(values.size());
  const double m = simd::sum(values) / n;
  // One correction pass; makes the mean of identical values exact.
  double r = 0.0;
  for (double v : values) r += v - m;
  return m + r / n;
}

double sample_std(std::span<const double> values) {
  require_at_least(values, 2, "standard deviation");
  const double m = mean(values);
  return std::sqrt(simd::sum_sq_dev(values, m) / static_cast<double>(values.size() - 1));
}

double rel_std(std::span<const double> values) {
  require_at_least(values, 2, "rel_std");
  const double m = checked_abs_mean(values, "rel_std");
  return sample_std(values) / m;
}

double quantile(std::span<const double> values, double p) {
  if (values.empty()) throw DomainError("quantile of an empty set");
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  const double h = (static_cast<double>(v.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= v.size()) return v.back();
  return v[lo] + (h - static_cast<double>(lo)) * (v[lo + 1] - v[lo]);
}

double spread(std::span<const double> values, SpreadKind kind) {
  require_at_least(values, 2, to_string(kind));
  const double n = static_cast<double>(values.size());
  const double abs_mean = is_relative(kind) ? checked_abs_mean(values, to_string(kind)) : 0.0;
  const auto [min_it, max_it] = std::minmax_element(values.begin(), values.end());
  const double range = *max_it - *min_it;

  switch (kind) {
    case SpreadKind::rel_dispersion:
      return range / abs_mean;
    case SpreadKind::dispersion:
      return range;
    case SpreadKind::rel_std:
      return sample_std(values) / abs_mean;
    case SpreadKind::std:
      return sample_std(values);
    case SpreadKind::variance:
      return simd::sum_sq_dev(values, mean(values)) / n;
    case SpreadKind::mean_pairwise_distance:
      return 2.0 * simd::pairwise_abs_sum(values) / (n * n);
    case SpreadKind::rel_mean_pairwise_distance:
      return 2.0 * simd::pairwise_abs_sum(values) / (n * n) / abs_mean;
    case SpreadKind::mean_squared_pairwise_distance:
      return 2.0 * simd::pairwise_sq_sum(values) / (n * n);
    case SpreadKind::rel_mean_squared_pairwise_distance:
      return 2.0 * simd::pairwise_sq_sum(values) / (n * n) / (abs_mean * abs_mean);
    case SpreadKind::iqr:
      return quantile(values, 0.75) - quantile(values, 0.25);
    case SpreadKind::quartile_deviation:
      return (quantile(values, 0.75) - quantile(values, 0.25)) / 2.0;
    case SpreadKind::avg_abs_deviation:
      return simd::sum_abs_dev(values, mean(values)) / n;
    case SpreadKind::median_abs_deviation: {
      const double med = quantile(values, 0.5);
      std::vector<double> dev(values.size());
      std::transform(values.begin(), values.end(), dev.begin(),
                     [med](double x) { return std::fabs(x - med); });
      return quantile(dev, 0.5);
    }
    case SpreadKind::rms_deviation:
      return std::sqrt(simd::sum_sq_dev(values, mean(values)) / n);
    case SpreadKind::gini_coefficient:
      // Σ_{i,j} counts each unordered pair twice; the 2 cancels.
      return simd::pairwise_abs_sum(values) / (n * n * abs_mean);
    case SpreadKind::star_discrepancy:
      return star_discrepancy(values);
  }
  throw DomainError("unknown spread kind");
}

double total_variation(std::span<const double> values) {
  if (values.size() < 2) throw DomainError("total variation needs at least 2 points");
  double acc = 0.0;
  for (std::size_t t = 1; t < values.size(); ++t) {
    const double d = values[t] - values[t - 1];
    acc += std::fabs(d) - d;
  }
  return acc / static_cast<double>(values.size() - 1);
}

double total_variation(std::span<const Point> series) { return total_variation(values_of(series)); }

std::string_view to_string(NoiseKind kind) {
  switch (kind) {
    case NoiseKind::final_n_rel_std: return "final_n_rel_std";
    case NoiseKind::total_variation: return "total_variation";
    case NoiseKind::seed: return "seed";
    case NoiseKind::data_order: return "data_order";
  }
  return "unknown";
}

NoiseEstimate noise_final_n(std::span<const Point> curve, std::size_t n) {
  const auto window = final_window(curve, n);
  NoiseEstimate est;
  est.kind = NoiseKind::final_n_rel_std;
  est.n_used = n;
  est.value = rel_std(window);
  return est;
}

NoiseEstimate noise_final_n(const EvalStore& store, std::string_view model_id,
                            std::string_view benchmark, std::string_view metric, std::size_t n,
                            std::string_view subtask) {
  const auto curve = store.curve(model_id, benchmark, metric, subtask);
  if (curve.size() < n)
    throw InsufficientCheckpointsError(curve.size(), n, {std::string(model_id)});
  auto est = noise_final_n(curve, n);
  est.model_ids = {std::string(model_id)};
  return est;
}

NoiseEstimate total_variation_noise(const EvalStore& store, std::string_view model_id,
                                    std::string_view benchmark, std::string_view metric,
                                    std::string_view subtask) {
  const auto curve = store.curve(model_id, benchmark, metric, subtask);
  if (curve.size() < 2) throw InsufficientCheckpointsError(curve.size(), 2, {std::string(model_id)});
  NoiseEstimate est;
  est.kind = NoiseKind::total_variation;
  est.value = total_variation(curve);
  est.n_used = curve.size();
  est.model_ids = {std::string(model_id)};
  return est;
}

namespace {

const Series& curve_of(const CurveMap& curves, const std::string& id) {
  static const Series empty;
  auto it = curves.find(id);
  return it == curves.end() ? empty : it->second;
}

void check_window(const CurveMap& curves, std::span<const std::string> ids, std::size_t n) {
  std::vector<std::string> offenders;
  std::size_t shortest = std::numeric_limits<std::size_t>::max();
  for (const auto& id : ids) {
    const auto len = curve_of(curves, id).size();
    if (len < n) {
      offenders.push_back(id);
      shortest = std::min(shortest, len);
    }
  }
  if (!offenders.empty()) throw InsufficientCheckpointsError(shortest, n, std::move(offenders));
}

}  // namespace

double population_noise(const CurveMap& curves, std::span<const std::string> model_ids,
                        std::size_t n) {
  if (model_ids.empty()) throw DomainError("population noise needs at least one model");
  check_window(curves, model_ids, n);
  double acc = 0.0;
  for (const auto& id : model_ids) acc += noise_final_n(curve_of(curves, id), n).value;
  return acc / static_cast<double>(model_ids.size());
}

double population_noise(const EvalStore& store, std::span<const std::string> model_ids,
                        std::string_view benchmark, std::string_view metric, std::size_t n,
                        std::string_view subtask) {
  return population_noise(fetch_curves(store, model_ids, benchmark, metric, subtask), model_ids, n);
}

NoiseEstimate seed_or_order_noise(const CurveMap& curves, std::span<const std::string> model_ids,
                                  std::size_t n, NoiseKind kind) {
  if (model_ids.size() < 2) throw DomainError("seed/data-order noise needs at least 2 models");
  check_window(curves, model_ids, n);
  std::vector<double> means;
  means.reserve(model_ids.size());
  for (const auto& id : model_ids) means.push_back(mean(final_window(curve_of(curves, id), n)));
  NoiseEstimate est;
  est.kind = kind;
  est.value = rel_std(means);
  est.n_used = n;
  est.model_ids.assign(model_ids.begin(), model_ids.end());
  return est;
}

NoiseEstimate seed_or_order_noise(const EvalStore& store, std::span<const std::string> model_ids,
                                  std::string_view metric, std::string_view benchmark,
                                  std::size_t n, NoiseKind kind, std::string_view subtask) {
  return seed_or_order_noise(fetch_curves(store, model_ids, benchmark, metric, subtask), model_ids,
                             n, kind);
}

double snr_rank_key(const SnrReport& r) {
  switch (r.status) {
    case SnrStatus::finite: return r.snr;
    case SnrStatus::infinite: return std::numeric_limits<double>::infinity();
    case SnrStatus::degenerate: return -std::numeric_limits<double>::infinity();
  }
  return r.snr;
}

SnrReport make_snr(double signal, double noise) {
  SnrReport r;
  r.signal = signal;
  r.noise = noise;
  if (noise > 0) {
    r.snr = signal / noise;
    r.status = SnrStatus::finite;
  } else if (signal > 0) {
    r.snr = std::numeric_limits<double>::infinity();
    r.status = SnrStatus::infinite;
  } else {
    r.snr = std::numeric_limits<double>::quiet_NaN();
    r.status = SnrStatus::degenerate;
  }
  return r;
}

std::vector<double> final_scores(const CurveMap& curves, std::span<const std::string> model_ids) {
  std::vector<double> out;
  out.reserve(model_ids.size());
  std::vector<std::string> missing;
  for (const auto& id : model_ids) {
    const auto& c = curve_of(curves, id);
    if (c.empty())
      missing.push_back(id);
    else
      out.push_back(c.back().value);
  }
  if (!missing.empty()) throw InsufficientCheckpointsError(0, 1, std::move(missing));
  return out;
}

SnrReport snr_from_curves(const CurveMap& curves, std::span<const std::string> population_ids,
                          std::span<const std::string> noise_model_ids, std::size_t n) {
  if (population_ids.size() < 2) throw DomainError("SNR population needs at least 2 models");
  const auto finals = final_scores(curves, population_ids);
  const double signal = spread(finals, SpreadKind::rel_dispersion);
  const double noise = population_noise(curves, noise_model_ids, n);
  auto r = make_snr(signal, noise);
  r.population.assign(population_ids.begin(), population_ids.end());
  r.noise_models.assign(noise_model_ids.begin(), noise_model_ids.end());
  r.window_n = n;
  return r;
}

SnrReport snr(const EvalStore& store, std::span<const std::string> population_ids,
              std::span<const std::string> noise_model_ids, std::string_view benchmark,
              std::string_view metric, std::size_t n, std::string_view subtask) {
  std::vector<std::string> all(population_ids.begin(), population_ids.end());
  all.insert(all.end(), noise_model_ids.begin(), noise_model_ids.end());
  auto r = snr_from_curves(fetch_curves(store, all, benchmark, metric, subtask), population_ids,
                           noise_model_ids, n);
  r.benchmark = std::string(benchmark);
  r.metric = std::string(metric);
  return r;
}

CurveMap fetch_curves(const EvalStore& store, std::span<const std::string> model_ids,
                      std::string_view benchmark, std::string_view metric,
                      std::string_view subtask) {
  CurveMap out;
  for (const auto& id : model_ids)
    if (!out.contains(id)) out.emplace(id, store.curve(id, benchmark, metric, subtask));
  return out;
}

double bits_per_byte(double nll_nats, std::int64_t num_bytes) {
  if (num_bytes < 1) throw DomainError("bits_per_byte: num_bytes must be >= 1");
  if (!(nll_nats >= 0)) throw DomainError("bits_per_byte: nll_nats must be >= 0");
  return nll_nats / (std::numbers::ln2 * static_cast<double>(num_bytes));
}

double aggregate_bpb(std::span<const InstanceRecord> records, BpbAggregation how) {
  if (records.empty()) throw DomainError("BPB aggregation over an empty instance set");
  if (how == BpbAggregation::macro) {
    double acc = 0.0;
    for (const auto& r : records) acc += bits_per_byte(r.nll_nats, r.num_bytes);
    return acc / static_cast<double>(records.size());
  }
  double nll = 0.0;
  std::int64_t bytes = 0;
  for (const auto& r : records) {
    nll += r.nll_nats;
    bytes += r.num_bytes;
  }
  return bits_per_byte(nll, bytes);
}

}  // namespace signoise
