#include "signoise/interventions.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "signoise/errors.hpp"
#include "signoise/parallel.hpp"
#include "signoise/rng.hpp"

namespace signoise {

namespace {

std::span<const std::string> noise_ids_of(const SubtaskFilterOptions& o) {
  return o.noise_ids.empty() ? std::span<const std::string>(o.population_ids)
                             : std::span<const std::string>(o.noise_ids);
}

CurveMap subtask_set_curves(const EvalStore& store, std::string_view benchmark,
                            std::span<const std::string> subtasks, std::string_view metric) {
  // Sorted so the aggregate does not depend on the order subtasks were added.
  std::vector<std::string> sorted(subtasks.begin(), subtasks.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<TaskRef> tasks;
  tasks.reserve(sorted.size());
  for (auto& s : sorted) tasks.push_back({std::string(benchmark), std::move(s)});
  return macro_average(store, std::span<const TaskRef>(tasks), metric, MissingPolicy::strict);
}

SnrReport snr_of(const CurveMap& curves, std::string_view benchmark,
                 const SubtaskFilterOptions& o) {
  auto r = snr_from_curves(curves, o.population_ids, noise_ids_of(o), o.window_n);
  r.benchmark = std::string(benchmark);
  r.metric = o.metric;
  return r;
}

}  // namespace

std::vector<std::string> SubtaskFilterTrace::ordered_subtasks() const {
  std::vector<std::string> out;
  out.reserve(ordered.size());
  for (const auto& s : ordered) out.push_back(s.subtask);
  return out;
}

std::size_t SubtaskFilterTrace::best_prefix() const {
  if (prefixes.empty()) return 0;
  std::size_t best = 0;
  for (std::size_t i = 1; i < prefixes.size(); ++i)
    if (snr_rank_key(prefixes[i].snr) > snr_rank_key(prefixes[best].snr)) best = i;
  return prefixes[best].prefix_len;
}

SnrReport subtask_set_snr(const EvalStore& store, std::string_view benchmark,
                          std::span<const std::string> subtasks,
                          const SubtaskFilterOptions& options) {
  if (subtasks.empty()) throw DomainError("subtask set is empty");
  return snr_of(subtask_set_curves(store, benchmark, subtasks, options.metric), benchmark,
                options);
}

BaselineResult random_order_baseline(const EvalStore& store, std::string_view benchmark,
                                     std::span<const std::string> subtasks,
                                     const SubtaskFilterOptions& options) {
  if (options.baseline_trials < 1) throw DomainError("random-order baseline needs trials >= 1");
  const std::size_t trials = options.baseline_trials;
  const std::size_t k = subtasks.size();
  std::vector<std::vector<double>> snrs(trials, std::vector<double>(k));
  parallel_for(trials, options.threads, [&](std::size_t t) {
    Rng rng = Rng::stream(options.seed, t);
    std::vector<std::string> order(subtasks.begin(), subtasks.end());
    shuffle(std::span<std::string>(order), rng);
    for (std::size_t len = 1; len <= k; ++len)
      snrs[t][len - 1] =
          subtask_set_snr(store, benchmark, std::span(order).first(len), options).snr;
  });
  BaselineResult out;
  out.mean.resize(k);
  out.std.resize(k);
  out.std_by_convention = trials == 1;
  std::vector<double> column(trials);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t t = 0; t < trials; ++t) column[t] = snrs[t][i];
    out.mean[i] = mean(column);
    out.std[i] = trials == 1 ? 0.0 : sample_std(column);
  }
  return out;
}

SubtaskFilterTrace greedy_subtask_filter(const EvalStore& store, std::string_view benchmark,
                                         const SubtaskFilterOptions& options) {
  const auto subtasks = store.subtasks(benchmark);
  if (subtasks.empty())
    throw DomainError("benchmark '" + std::string(benchmark) + "' has no subtasks");

  SubtaskFilterTrace trace;
  trace.benchmark = std::string(benchmark);
  trace.metric = options.metric;
  trace.ordered.resize(subtasks.size());
  parallel_for(subtasks.size(), options.threads, [&](std::size_t i) {
    auto r = subtask_set_snr(store, benchmark, std::span(subtasks).subspan(i, 1), options);
    const bool degenerate = r.status == SnrStatus::degenerate;
    trace.ordered[i] = {subtasks[i], std::move(r), degenerate};
  });
  std::stable_sort(trace.ordered.begin(), trace.ordered.end(),
                   [](const SubtaskScore& a, const SubtaskScore& b) {
                     if (a.degenerate != b.degenerate) return b.degenerate;
                     const double ka = snr_rank_key(a.snr), kb = snr_rank_key(b.snr);
                     if (ka != kb) return ka > kb;
                     return a.subtask < b.subtask;
                   });

  const auto order = trace.ordered_subtasks();
  const bool with_accuracy = !options.small_ids.empty() && !options.large_ids.empty();
  trace.prefixes.resize(order.size());
  parallel_for(order.size(), options.threads, [&](std::size_t i) {
    const auto curves = subtask_set_curves(store, benchmark, std::span(order).first(i + 1),
                                           options.metric);
    PrefixReport& p = trace.prefixes[i];
    p.prefix_len = i + 1;
    p.subtask_added = order[i];
    p.snr = snr_of(curves, benchmark, options);
    if (with_accuracy) {
      const auto ps = paired_scores(store, curves, options.small_ids, options.large_ids,
                                    options.small_scoring, options.large_scoring);
      p.decision_accuracy = decision_accuracy(ps);
    }
    if (options.target_id) {
      auto it = curves.find(*options.target_id);
      if (it == curves.end())
        throw InsufficientCheckpointsError(0, options.target_window, {*options.target_id});
      p.target_noise = noise_final_n(it->second, options.target_window).value;
    }
  });

  if (options.baseline_trials > 0) {
    const auto base = random_order_baseline(store, benchmark, subtasks, options);
    for (std::size_t i = 0; i < order.size(); ++i) {
      trace.prefixes[i].baseline_mean_snr = base.mean[i];
      trace.prefixes[i].baseline_std_snr = base.std[i];
    }
    trace.has_baseline = true;
    trace.baseline_std_by_convention = base.std_by_convention;
  }
  return trace;
}

double checkpoint_average(std::span<const Point> series, std::size_t k) {
  if (k < 1) throw DomainError("checkpoint_average needs k >= 1");
  return mean(final_window(series, k));
}

Series ema(std::span<const Point> series, double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw DomainError("EMA alpha must be in (0, 1]");
  if (series.empty()) throw InsufficientCheckpointsError(0, 1);
  Series out(series.begin(), series.end());
  for (std::size_t t = 1; t < out.size(); ++t)
    out[t].value = alpha * series[t].value + (1.0 - alpha) * out[t - 1].value;
  return out;
}

double early_stop_decision_accuracy(const EvalStore& store, std::span<const std::string> model_ids,
                                    std::string_view benchmark, std::string_view metric,
                                    std::int64_t step, Smoothing smoothing, double alpha,
                                    std::string_view subtask) {
  PairedScores ps;
  std::vector<std::string> empty;
  for (const auto& id : model_ids) {
    auto curve = store.curve(id, benchmark, metric, subtask);
    if (curve.empty()) {
      empty.push_back(id);
      continue;
    }
    if (curve.front().step > step)
      throw DomainError("step " + std::to_string(step) + " precedes the first checkpoint (" +
                        std::to_string(curve.front().step) + ") of model '" + id + "'");
    const Series scored = smoothing == Smoothing::ema ? ema(curve, alpha) : curve;
    auto it = std::upper_bound(scored.begin(), scored.end(), step,
                               [](std::int64_t s, const Point& p) { return s < p.step; });
    ps.labels.push_back(id);
    ps.small.push_back(std::prev(it)->value);
    ps.large.push_back(curve.back().value);
  }
  if (!empty.empty()) throw InsufficientCheckpointsError(0, 1, std::move(empty));
  return decision_accuracy(ps);
}

std::vector<std::string> instance_keys(const EvalStore& store, std::string_view benchmark) {
  std::set<std::string> keys;
  for (const auto& r : store.instances())
    if (r.benchmark == benchmark)
      keys.insert(r.subtask.empty() ? r.instance_id : r.subtask + "/" + r.instance_id);
  return {keys.begin(), keys.end()};
}

namespace {

std::vector<Measurement> aggregate_selected(const EvalStore& store, std::string_view benchmark,
                                            std::string_view metric,
                                            const std::set<std::string>* selected) {
  const bool bpb = metric == "bpb";
  if (!bpb && metric != "primary")
    throw DomainError("instance aggregates support metric 'primary' or 'bpb', not '" +
                      std::string(metric) + "'");
  std::vector<Measurement> out;
  std::vector<InstanceRecord> group;
  const auto flush = [&] {
    if (group.empty()) return;
    double value = 0.0;
    if (bpb) {
      value = aggregate_bpb(group, BpbAggregation::micro);
    } else {
      double sum = 0.0;
      for (const auto& r : group) sum += r.primary_score;
      value = sum / static_cast<double>(group.size());
    }
    out.push_back({group.front().model_id, group.front().step, std::string(benchmark), "",
                   std::string(metric), value});
    group.clear();
  };
  for (const auto& r : store.instances()) {
    if (r.benchmark != benchmark) continue;
    if (selected &&
        !selected->contains(r.subtask.empty() ? r.instance_id : r.subtask + "/" + r.instance_id))
      continue;
    if (!group.empty() && (group.front().model_id != r.model_id || group.front().step != r.step))
      flush();
    group.push_back(r);
  }
  flush();
  return out;
}

}  // namespace

std::vector<Measurement> subsample_instances(const EvalStore& store, std::string_view benchmark,
                                             std::string_view metric, std::size_t m,
                                             std::uint64_t seed) {
  const auto keys = instance_keys(store, benchmark);
  if (keys.empty())
    throw DomainError("no instance-level records for benchmark '" + std::string(benchmark) + "'");
  if (m < 1 || m > keys.size())
    throw DomainError("subsample size " + std::to_string(m) + " outside [1, " +
                      std::to_string(keys.size()) + "]");
  Rng rng(seed);
  std::set<std::string> selected;
  for (auto i : sample_indices(rng, keys.size(), m)) selected.insert(keys[i]);
  return aggregate_selected(store, benchmark, metric, &selected);
}

std::vector<Measurement> aggregate_instances(const EvalStore& store, std::string_view benchmark,
                                             std::string_view metric) {
  if (instance_keys(store, benchmark).empty())
    throw DomainError("no instance-level records for benchmark '" + std::string(benchmark) + "'");
  return aggregate_selected(store, benchmark, metric, nullptr);
}

namespace {

MetricReport metric_report(const EvalStore& store, std::string_view benchmark,
                           const MetricComparisonOptions& o, std::string_view metric) {
  const auto metrics = store.metrics();
  if (!std::binary_search(metrics.begin(), metrics.end(), std::string(metric)))
    throw DomainError("missing metric column '" + std::string(metric) + "'");
  MetricReport r;
  r.metric = std::string(metric);
  const auto& noise = o.noise_ids.empty() ? o.population_ids : o.noise_ids;
  r.snr = snr(store, o.population_ids, noise, benchmark, metric, o.window_n);
  if (!o.small_ids.empty() && !o.large_ids.empty()) {
    const auto ps = paired_scores_from_store(store, o.small_ids, o.large_ids, benchmark, metric,
                                             o.small_scoring, o.large_scoring);
    r.decision_accuracy = decision_accuracy(ps);
  }
  if (o.scaling && !o.scaling->ladder_ids.empty() && !o.scaling->target_id.empty()) {
    ScalingFitRequest req = *o.scaling;
    req.benchmark = std::string(benchmark);
    req.metric = std::string(metric);
    r.scaling = scaling_fit_report(store, req);
  }
  return r;
}

}  // namespace

MetricComparison metric_comparison(const EvalStore& store, std::string_view benchmark,
                                   const MetricComparisonOptions& options,
                                   std::string_view metric_a, std::string_view metric_b) {
  return {std::string(benchmark), metric_report(store, benchmark, options, metric_a),
          metric_report(store, benchmark, options, metric_b)};
}

}  // namespace signoise
