#include "signoise/cli.hpp"

#include <fnmatch.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "signoise/agreement.hpp"
#include "signoise/errors.hpp"
#include "signoise/eval_store.hpp"
#include "signoise/interventions.hpp"
#include "signoise/io.hpp"
#include "signoise/metrics.hpp"
#include "signoise/report.hpp"
#include "signoise/scaling_law.hpp"
#include "signoise/stat_kernels.hpp"
#include "signoise/synth.hpp"

namespace signoise::cli {

namespace {

namespace fs = std::filesystem;
using report::Cell;
using report::Table;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  // inputs
  std::vector<std::string> inputs;
  std::string models;
  std::vector<std::string> instances;
  std::string field_map;
  std::string config;
  // selection
  std::vector<std::string> benchmarks;
  std::string subtask;
  std::string metric = "primary";
  std::vector<std::string> population;
  std::vector<std::string> noise_models;
  std::vector<std::string> small;
  std::vector<std::string> large;
  std::vector<std::string> ladder;
  std::string target;
  std::optional<double> target_flops;
  double flops_tol = 0.1;
  // parameters
  std::size_t window_n = 5;
  std::size_t target_window = 30;
  std::size_t avg_k = 5;
  double ema_alpha = 0.1;
  std::uint64_t seed = 0;
  unsigned threads = 0;
  std::string noise_kind = "final_n";
  std::vector<std::string> measures;
  std::vector<std::string> scoring;
  std::string ties = "half";
  std::string loss_metric = "bpb";
  std::string ladder_scoring = "final";
  std::string target_scoring = "final";
  std::vector<double> params;
  std::vector<double> tokens;
  std::optional<std::size_t> trials;
  std::vector<std::int64_t> steps;
  std::string smoothing = "both";
  std::vector<double> ks;
  std::vector<double> alphas;
  std::vector<std::size_t> ns;
  std::optional<std::size_t> window;
  std::size_t draws = 1000;
  std::size_t m = 0;
  std::string metric_a = "primary";
  std::string metric_b = "bpb";
  synth::DemoOptions demo;
  std::string data_format = "csv";
  std::string x_col;
  std::string y_col;
  std::string label_col = "benchmark";
  std::string x_scale = "auto";
  // output
  std::string out;
  std::string format = "csv";
};

// ---- shared helpers -------------------------------------------------------

EvalStore load_store(const Options& o) {
  if (o.models.empty()) throw UsageError("--models is required");
  if (o.inputs.empty()) throw UsageError("--input is required");
  IngestPaths paths;
  paths.models.emplace_back(o.models);
  for (const auto& p : o.inputs) paths.measurements.emplace_back(p);
  for (const auto& p : o.instances) paths.instances.emplace_back(p);
  const FieldMap fm = o.field_map.empty() ? FieldMap{} : io::read_field_map(o.field_map);
  return ingest(paths, std::nullopt, fm);
}

/// Expands model ids and shell-style patterns ("*-1b") in sorted id order.
std::vector<std::string> resolve(const EvalStore& store, std::span<const std::string> patterns) {
  std::vector<std::string> out;
  std::set<std::string> seen;
  const auto ids = store.model_ids();
  for (const auto& pat : patterns) {
    if (pat.find_first_of("*?[") == std::string::npos) {
      if (!store.has_model(pat)) throw UnknownModelError(pat);
      if (seen.insert(pat).second) out.push_back(pat);
      continue;
    }
    bool any = false;
    for (const auto& id : ids) {
      if (fnmatch(pat.c_str(), id.c_str(), 0) == 0) {
        any = true;
        if (seen.insert(id).second) out.push_back(id);
      }
    }
    if (!any) throw DomainError("pattern '" + pat + "' matched no models");
  }
  return out;
}

/// Curves of every model on a benchmark. Without a subtask, whole-benchmark
/// rows are used when present, otherwise the macro-average of its subtasks.
CurveMap benchmark_curves(const EvalStore& store, const std::string& bench,
                          const std::string& metric, const std::string& subtask) {
  const auto ids = store.model_ids();
  if (!subtask.empty()) return fetch_curves(store, ids, bench, metric, subtask);
  const bool whole = std::any_of(store.measurements().begin(), store.measurements().end(),
                                 [&](const Measurement& m) {
                                   return m.benchmark == bench && m.metric == metric &&
                                          m.subtask.empty();
                                 });
  if (whole) return fetch_curves(store, ids, bench, metric);
  const auto subs = store.subtasks(bench);
  if (subs.empty())
    throw DomainError("no '" + metric + "' measurements for benchmark '" + bench + "'");
  std::vector<TaskRef> tasks;
  for (const auto& s : subs) tasks.push_back({bench, s});
  return macro_average(store, std::span<const TaskRef>(tasks), metric);
}

std::vector<std::string> with_data(const CurveMap& curves) {
  std::vector<std::string> out;
  for (const auto& [id, c] : curves)
    if (!c.empty()) out.push_back(id);
  return out;
}

std::vector<std::string> population_of(const Options& o, const EvalStore& store,
                                       const CurveMap& curves) {
  if (o.target_flops) return select_population(store, *o.target_flops, o.flops_tol);
  if (!o.population.empty()) return resolve(store, o.population);
  return with_data(curves);
}

std::vector<std::string> noise_ids_of(const Options& o, const EvalStore& store,
                                      const std::vector<std::string>& population) {
  return o.noise_models.empty() ? population : resolve(store, o.noise_models);
}

const std::vector<std::string>& benchmarks_of(const Options& o) {
  if (o.benchmarks.empty()) throw UsageError("--benchmark is required");
  return o.benchmarks;
}

const std::string& single_benchmark(const Options& o) {
  const auto& b = benchmarks_of(o);
  if (b.size() != 1) throw UsageError("exactly one --benchmark is expected");
  return b.front();
}

Scoring scoring_of(const std::string& name, std::size_t k) {
  if (name == "final") return {ScoringKind::final, k};
  return {ScoringKind::avg_last_k, k};
}

Cell count(std::size_t n) { return static_cast<std::int64_t>(n); }

Table measurement_table(std::span<const Measurement> rows) {
  Table t{{"model_id", "step", "benchmark", "subtask", "metric", "value"}, {}};
  for (const auto& m : rows)
    t.add({m.model_id, m.step, m.benchmark, m.subtask, m.metric, m.value});
  return t;
}

// ---- commands -------------------------------------------------------------

Table cmd_validate(const Options& o) {
  const auto store = load_store(o);
  Table t{{"models", "measurements", "instances", "benchmarks", "metrics"}, {}};
  t.add({count(store.models().size()), count(store.measurements().size()),
         count(store.instances().size()), count(store.benchmarks().size()),
         count(store.metrics().size())});
  return t;
}

Table cmd_snr(const Options& o) {
  const auto store = load_store(o);
  std::vector<SnrReport> reports;
  for (const auto& bench : benchmarks_of(o)) {
    const auto curves = benchmark_curves(store, bench, o.metric, o.subtask);
    const auto pop = population_of(o, store, curves);
    auto r = snr_from_curves(curves, pop, noise_ids_of(o, store, pop), o.window_n);
    r.benchmark = bench;
    r.metric = o.metric;
    reports.push_back(std::move(r));
  }
  return report::snr_table(reports);
}

Table cmd_noise(const Options& o) {
  const auto store = load_store(o);
  Table t{{"model_id", "benchmark", "metric", "kind", "noise", "n_used"}, {}};
  for (const auto& bench : benchmarks_of(o)) {
    const auto curves = benchmark_curves(store, bench, o.metric, o.subtask);
    const auto pop = population_of(o, store, curves);
    if (o.noise_kind == "seed" || o.noise_kind == "data_order") {
      const auto kind = o.noise_kind == "seed" ? NoiseKind::seed : NoiseKind::data_order;
      const auto est = seed_or_order_noise(curves, pop, o.window_n, kind);
      std::string joined;
      for (const auto& id : pop) joined += (joined.empty() ? "" : ";") + id;
      t.add({joined, bench, o.metric, std::string(to_string(kind)), est.value,
             count(est.n_used)});
      continue;
    }
    for (const auto& id : pop) {
      const auto& c = curves.at(id);
      NoiseEstimate est;
      if (o.noise_kind == "total_variation") {
        est.kind = NoiseKind::total_variation;
        est.value = total_variation(c);
        est.n_used = c.size();
      } else {
        try {
          est = noise_final_n(c, o.window_n);
        } catch (const InsufficientCheckpointsError& e) {
          throw InsufficientCheckpointsError(e.available(), e.required(), {id});
        }
      }
      t.add({id, bench, o.metric, std::string(to_string(est.kind)), est.value,
             count(est.n_used)});
    }
  }
  return t;
}

Table cmd_signal(const Options& o) {
  const auto store = load_store(o);
  std::vector<SpreadKind> kinds;
  if (o.measures.empty()) kinds.push_back(SpreadKind::rel_dispersion);
  for (const auto& name : o.measures) {
    if (name == "all") {
      const auto all = all_spread_kinds();
      kinds.insert(kinds.end(), all.begin(), all.end());
    } else if (auto k = parse_spread_kind(name)) {
      kinds.push_back(*k);
    } else {
      throw UsageError("unknown --measure '" + name + "'");
    }
  }
  Table t{{"benchmark", "metric", "measure", "signal", "population_size"}, {}};
  for (const auto& bench : benchmarks_of(o)) {
    const auto curves = benchmark_curves(store, bench, o.metric, o.subtask);
    const auto pop = population_of(o, store, curves);
    const auto finals = final_scores(curves, pop);
    for (auto k : kinds)
      t.add({bench, o.metric, std::string(to_string(k)), spread(finals, k), count(pop.size())});
  }
  return t;
}

Table cmd_decision_acc(const Options& o) {
  const auto store = load_store(o);
  if (o.small.empty() || o.large.empty()) throw UsageError("--small and --large are required");
  const auto small = resolve(store, o.small);
  const auto large = resolve(store, o.large);
  const Scoring fin{ScoringKind::final, o.avg_k};
  const Scoring avg{ScoringKind::avg_last_k, o.avg_k};
  const std::map<std::string, std::pair<Scoring, Scoring>> variants{
      {"final", {fin, fin}},
      {"avg-small", {avg, fin}},
      {"avg-large", {fin, avg}},
      {"avg-both", {avg, avg}},
  };
  std::vector<std::string> names = o.scoring.empty() ? std::vector<std::string>{"final"} : o.scoring;
  if (std::find(names.begin(), names.end(), "all") != names.end())
    names = {"final", "avg-small", "avg-large", "avg-both"};
  std::vector<report::AgreementRow> rows;
  for (const auto& bench : benchmarks_of(o)) {
    const auto curves = benchmark_curves(store, bench, o.metric, o.subtask);
    for (const auto& name : names) {
      auto it = variants.find(name);
      if (it == variants.end()) throw UsageError("unknown --scoring '" + name + "'");
      const auto ps =
          paired_scores(store, curves, small, large, it->second.first, it->second.second);
      if (o.ties == "error") decision_accuracy(ps, TiePolicy::error);
      rows.push_back({bench, o.metric, name, agreement(ps)});
    }
  }
  return report::agreement_table(rows);
}

ScalingFitRequest fit_request(const Options& o, const EvalStore& store, const std::string& bench) {
  ScalingFitRequest req;
  req.ladder_ids = resolve(store, o.ladder);
  req.target_id = o.target;
  req.benchmark = bench;
  req.loss_metric = o.loss_metric;
  req.metric = o.metric;
  req.ladder_scoring = scoring_of(o.ladder_scoring, o.avg_k);
  req.target_scoring = scoring_of(o.target_scoring, o.avg_k);
  req.target_window = o.target_window;
  return req;
}

Table cmd_scaling_fit(const Options& o) {
  const auto store = load_store(o);
  if (o.ladder.empty() || o.target.empty()) throw UsageError("--ladder and --target are required");
  if (!store.has_model(o.target)) throw UnknownModelError(o.target);
  std::vector<ScalingFitReport> reports;
  for (const auto& bench : benchmarks_of(o))
    reports.push_back(scaling_fit_report(store, fit_request(o, store, bench)));
  return report::fit_table(reports);
}

Table cmd_scaling_predict(const Options& o) {
  const auto store = load_store(o);
  if (o.ladder.empty()) throw UsageError("--ladder is required");
  if (o.params.empty() || o.params.size() != o.tokens.size())
    throw UsageError("--params and --tokens must list the same number of values");
  const auto& bench = single_benchmark(o);
  const auto req = fit_request(o, store, bench);
  const auto points =
      ladder_points(store, req.ladder_ids, bench, o.loss_metric, o.metric, req.ladder_scoring);
  const auto chain = fit_chain(points, req.fit_options);
  Table t{{"benchmark", "metric", "params", "tokens", "predicted_loss", "predicted_metric"}, {}};
  for (std::size_t i = 0; i < o.params.size(); ++i)
    t.add({bench, o.metric, o.params[i], o.tokens[i],
           predict_loss(chain.power, o.params[i], o.tokens[i]),
           predict_metric(chain, o.params[i], o.tokens[i])});
  return t;
}

Table cmd_filter_subtasks(const Options& o) {
  const auto store = load_store(o);
  const auto& bench = single_benchmark(o);
  SubtaskFilterOptions f;
  f.metric = o.metric;
  f.window_n = o.window_n;
  if (o.population.empty() && !o.target_flops)
    f.population_ids = with_data(benchmark_curves(store, bench, o.metric, {}));
  else
    f.population_ids = population_of(o, store, {});
  f.noise_ids = noise_ids_of(o, store, f.population_ids);
  if (!o.small.empty() || !o.large.empty()) {
    if (o.small.empty() || o.large.empty()) throw UsageError("--small and --large go together");
    f.small_ids = resolve(store, o.small);
    f.large_ids = resolve(store, o.large);
    f.small_scoring = f.large_scoring = Scoring{ScoringKind::final, o.avg_k};
  }
  if (!o.target.empty()) {
    if (!store.has_model(o.target)) throw UnknownModelError(o.target);
    f.target_id = o.target;
  }
  f.target_window = o.target_window;
  f.baseline_trials = o.trials.value_or(10);
  f.seed = o.seed;
  f.threads = o.threads;
  return report::trace_table(greedy_subtask_filter(store, bench, f));
}

Table cmd_average(const Options& o) {
  const auto store = load_store(o);
  Table t{{"model_id", "benchmark", "metric", "k", "average"}, {}};
  for (const auto& bench : benchmarks_of(o)) {
    const auto curves = benchmark_curves(store, bench, o.metric, o.subtask);
    for (const auto& id : population_of(o, store, curves)) {
      try {
        t.add({id, bench, o.metric, count(o.avg_k), checkpoint_average(curves.at(id), o.avg_k)});
      } catch (const InsufficientCheckpointsError& e) {
        throw InsufficientCheckpointsError(e.available(), e.required(), {id});
      }
    }
  }
  return t;
}

Table cmd_ema(const Options& o) {
  const auto store = load_store(o);
  std::vector<Measurement> rows;
  for (const auto& bench : benchmarks_of(o)) {
    const auto curves = benchmark_curves(store, bench, o.metric, o.subtask);
    for (const auto& id : population_of(o, store, curves)) {
      const auto& c = curves.at(id);
      if (c.empty()) throw InsufficientCheckpointsError(0, 1, {id});
      for (const auto& p : ema(c, o.ema_alpha))
        rows.push_back({id, p.step, bench, o.subtask, o.metric + "_ema", p.value});
    }
  }
  return measurement_table(rows);
}

Table cmd_early_stop(const Options& o) {
  const auto store = load_store(o);
  std::vector<std::pair<std::string, Smoothing>> modes;
  if (o.smoothing == "none" || o.smoothing == "both") modes.emplace_back("none", Smoothing::none);
  if (o.smoothing == "ema" || o.smoothing == "both") modes.emplace_back("ema", Smoothing::ema);
  Table t{{"benchmark", "step", "smoothing", "decision_accuracy"}, {}};
  for (const auto& bench : benchmarks_of(o)) {
    std::vector<std::string> pop;
    if (o.population.empty() && !o.target_flops) {
      for (const auto& id : store.model_ids())
        if (!store.curve(id, bench, o.metric, o.subtask).empty()) pop.push_back(id);
    } else {
      pop = population_of(o, store, {});
    }
    std::vector<std::int64_t> steps = o.steps;
    if (steps.empty()) {
      std::int64_t first = std::numeric_limits<std::int64_t>::min();
      std::set<std::int64_t> all;
      for (const auto& id : pop) {
        const auto c = store.curve(id, bench, o.metric, o.subtask);
        if (c.empty()) continue;
        first = std::max(first, c.front().step);
        for (const auto& p : c) all.insert(p.step);
      }
      for (auto s : all)
        if (s >= first) steps.push_back(s);
    }
    for (auto step : steps)
      for (const auto& [name, mode] : modes)
        t.add({bench, step, name,
               early_stop_decision_accuracy(store, pop, bench, o.metric, step, mode, o.ema_alpha,
                                            o.subtask)});
  }
  return t;
}

Table cmd_min_n(const Options& o) {
  const std::vector<double> ks = o.ks.empty() ? std::vector<double>{0.1, 0.2, 0.5, 1.0} : o.ks;
  const std::vector<double> alphas =
      o.alphas.empty() ? std::vector<double>{0.90, 0.95, 0.99} : o.alphas;
  std::vector<report::MinNRow> rows;
  for (double k : ks)
    for (double a : alphas) rows.push_back({k, a, min_checkpoints({k, a})});
  return report::min_n_table(rows);
}

Table cmd_within_tolerance(const Options& o) {
  const auto store = load_store(o);
  if (o.target.empty()) throw UsageError("--target is required");
  const std::vector<double> ks = o.ks.empty() ? std::vector<double>{0.2} : o.ks;
  const std::vector<std::size_t> ns =
      o.ns.empty() ? std::vector<std::size_t>{5, 10, 20} : o.ns;
  std::vector<report::ToleranceRow> rows;
  for (const auto& bench : benchmarks_of(o)) {
    const auto curves = benchmark_curves(store, bench, o.metric, o.subtask);
    auto it = curves.find(o.target);
    if (it == curves.end()) throw UnknownModelError(o.target);
    const std::size_t w = o.window.value_or(0);
    const auto window = w == 0 ? values_of(it->second) : final_window(it->second, w);
    for (double k : ks)
      for (auto n : ns)
        rows.push_back({bench, n, k,
                        empirical_within_tolerance(window, n, k, o.trials.value_or(10000), o.seed,
                                                   o.threads)
                            .likelihood});
  }
  return report::tolerance_table(rows);
}

Table cmd_resample(const Options& o) {
  const auto store = load_store(o);
  if (o.small.empty() || o.large.empty()) throw UsageError("--small and --large are required");
  const auto& bench = single_benchmark(o);
  const auto curves = benchmark_curves(store, bench, o.metric, o.subtask);
  ResampleOptions r;
  r.window = o.window.value_or(5);
  r.draws = o.draws;
  r.seed = o.seed;
  r.threads = o.threads;
  const auto draws =
      resample_decision_accuracy(store, curves, resolve(store, o.small), resolve(store, o.large), r);
  return report::resample_table(draws);
}

Table cmd_subsample(const Options& o) {
  const auto store = load_store(o);
  if (o.m == 0) throw UsageError("--m must be >= 1");
  std::vector<Measurement> rows;
  for (const auto& bench : benchmarks_of(o)) {
    auto part = subsample_instances(store, bench, o.metric, o.m, o.seed);
    rows.insert(rows.end(), part.begin(), part.end());
  }
  return measurement_table(rows);
}

Table cmd_metric_compare(const Options& o) {
  const auto store = load_store(o);
  const auto& bench = single_benchmark(o);
  MetricComparisonOptions c;
  c.population_ids = population_of(o, store, fetch_curves(store, store.model_ids(), bench, o.metric_a));
  c.noise_ids = noise_ids_of(o, store, c.population_ids);
  c.window_n = o.window_n;
  if (!o.small.empty() && !o.large.empty()) {
    c.small_ids = resolve(store, o.small);
    c.large_ids = resolve(store, o.large);
    c.small_scoring = c.large_scoring = Scoring{ScoringKind::final, o.avg_k};
  }
  if (!o.ladder.empty() && !o.target.empty()) c.scaling = fit_request(o, store, bench);
  return report::metric_comparison_table(metric_comparison(store, bench, c, o.metric_a, o.metric_b));
}

Table cmd_synth(const Options& o) {
  if (o.out.empty()) throw UsageError("--out (output directory) is required");
  const auto frag = synth::generate_demo_dataset(o.demo);
  const fs::path dir(o.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error("cannot create directory '" + dir.string() + "': " + ec.message());
  const Format fmt = o.data_format == "jsonl" ? Format::jsonl : Format::csv;
  const std::string ext = fmt == Format::jsonl ? ".jsonl" : ".csv";
  Table t{{"file", "rows"}, {}};
  const auto emit = [&](const std::string& name, std::size_t rows, auto&& writer) {
    std::ostringstream ss;
    writer(ss);
    io::write_file_atomic(dir / name, ss.str());
    t.add({(dir / name).string(), count(rows)});
  };
  emit("models.csv", frag.models.size(),
       [&](std::ostream& s) { write_models(s, frag.models, Format::csv); });
  emit("measurements" + ext, frag.measurements.size(),
       [&](std::ostream& s) { write_measurements(s, frag.measurements, fmt); });
  emit("instances" + ext, frag.instances.size(),
       [&](std::ostream& s) { write_instances(s, frag.instances, fmt); });
  return t;
}

Table cmd_correlate(const Options& o) {
  if (o.inputs.empty()) throw UsageError("--input is required");
  if (o.x_col.empty() || o.y_col.empty()) throw UsageError("--x and --y are required");
  std::map<std::string, std::map<std::string, double>> table;
  for (const auto& path : o.inputs) {
    std::istringstream in(io::read_file(path));
    io::CsvReader reader(in, path);
    const auto header_rec = reader.next();
    if (!header_rec) throw ParseError(path, 1, "empty file");
    const io::CsvHeader header(*header_rec, {});
    const auto label_idx = header.require(o.label_col, path);
    std::vector<std::pair<std::size_t, std::string>> wanted;
    for (const auto* col : {&o.x_col, &o.y_col})
      if (auto idx = header.find(*col)) wanted.emplace_back(*idx, *col);
    while (auto rec = reader.next()) {
      if (rec->fields.size() != header.width())
        throw ParseError(path, rec->line, "expected " + std::to_string(header.width()) + " fields");
      for (const auto& [idx, col] : wanted) {
        const auto v = io::parse_double(rec->fields[idx]);
        if (!v) throw ParseError(path, rec->line, "column '" + col + "' is not a number");
        table[rec->fields[label_idx]][col] = *v;
      }
    }
  }
  std::vector<double> xs, ys;
  std::vector<std::string> labels;
  for (const auto& [label, cols] : table) {
    auto x = cols.find(o.x_col), y = cols.find(o.y_col);
    if (x == cols.end() || y == cols.end()) continue;
    xs.push_back(x->second);
    ys.push_back(y->second);
    labels.push_back(label);
  }
  // SNR spans orders of magnitude; correlate against its log by default.
  const bool log_x = o.x_scale == "log10" || (o.x_scale == "auto" && o.x_col == "snr");
  if (log_x) {
    for (std::size_t i = 0; i < xs.size(); ++i) {
      if (!(xs[i] > 0) || !std::isfinite(xs[i]))
        throw DomainError("log10 x-scale needs positive finite values (label '" + labels[i] + "')");
      xs[i] = std::log10(xs[i]);
    }
  }
  return report::correlation_table(xs, ys, labels);
}

// ---- wiring -----------------------------------------------------------------

using Command = std::function<Table(const Options&)>;

struct Spec {
  const char* name;
  const char* help;
  Command run;
  bool store = true;
};

void add_output(CLI::App* sub, Options& o) {
  sub->add_option("--config", o.config, "key=value file; keys are long flag names, flags win");
  sub->add_option("--out", o.out, "Output file (default: stdout)");
  sub->add_option("--format", o.format, "Output format")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();
  sub->add_option("--threads", o.threads, "Worker threads (0 = all cores)")->capture_default_str();
  sub->add_option("--seed", o.seed, "RNG seed")->capture_default_str();
}

void add_store(CLI::App* sub, Options& o) {
  sub->add_option("--input", o.inputs, "Measurement files (.csv/.jsonl)")->delimiter(',');
  sub->add_option("--models", o.models, "Model metadata file");
  sub->add_option("--instances", o.instances, "Instance-level record files")->delimiter(',');
  sub->add_option("--field-map", o.field_map, "Column rename file (field=column per line)");
}

void add_selection(CLI::App* sub, Options& o) {
  sub->add_option("--benchmark", o.benchmarks, "Benchmark name(s)")->delimiter(',');
  sub->add_option("--subtask", o.subtask, "Subtask (default: whole benchmark or macro-average)");
  sub->add_option("--metric", o.metric, "Metric column")->capture_default_str();
  sub->add_option("--population", o.population, "Model ids or patterns (e.g. '*-1b')")
      ->delimiter(',');
  sub->add_option("--noise-models", o.noise_models, "Models for the noise estimate")
      ->delimiter(',');
  sub->add_option("--target-flops", o.target_flops, "Select the population by compute");
  sub->add_option("--flops-tol", o.flops_tol, "Relative compute tolerance")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  sub->add_option("--window-n", o.window_n, "Final checkpoints used for noise")
      ->check(CLI::Range(std::size_t{2}, std::numeric_limits<std::size_t>::max()))
      ->capture_default_str();
  sub->add_option("--avg-k", o.avg_k, "Checkpoints averaged by avg scoring")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sub->add_option("--ema-alpha", o.ema_alpha, "EMA smoothing constant in (0, 1]")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
}

void add_pairs(CLI::App* sub, Options& o) {
  sub->add_option("--small", o.small, "Small-scale models (ids or patterns)")->delimiter(',');
  sub->add_option("--large", o.large, "Large-scale models (ids or patterns)")->delimiter(',');
}

void add_scaling(CLI::App* sub, Options& o) {
  sub->add_option("--ladder", o.ladder, "Ladder models (ids or patterns)")->delimiter(',');
  sub->add_option("--target", o.target, "Target model id");
  sub->add_option("--loss-metric", o.loss_metric, "Loss metric column")->capture_default_str();
  sub->add_option("--ladder-scoring", o.ladder_scoring, "Ladder scoring")
      ->check(CLI::IsMember({"final", "avg"}))
      ->capture_default_str();
  sub->add_option("--target-scoring", o.target_scoring, "Target scoring")
      ->check(CLI::IsMember({"final", "avg"}))
      ->capture_default_str();
  sub->add_option("--target-window", o.target_window, "Final checkpoints for target noise")
      ->check(CLI::Range(std::size_t{2}, std::numeric_limits<std::size_t>::max()))
      ->capture_default_str();
}

void read_config(CLI::App& app, std::vector<std::string>& args) {
  CLI::App* sub = nullptr;
  std::size_t sub_pos = 0;
  for (std::size_t i = 0; i < args.size() && !sub; ++i) {
    sub = app.get_subcommand_no_throw(args[i]);
    sub_pos = i;
  }
  if (!sub) return;
  std::string path;
  for (std::size_t i = sub_pos + 1; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
  }
  if (path.empty()) return;
  const auto entries = io::read_field_map(path);
  std::vector<std::string> injected;
  for (const auto& [key, value] : entries) {
    auto* opt = key == "config" ? nullptr : sub->get_option_no_throw("--" + key);
    if (!opt) throw UsageError("unknown config key '" + key + "' in " + path);
    const std::string flag = "--" + key;
    const bool given = std::any_of(args.begin() + static_cast<std::ptrdiff_t>(sub_pos) + 1,
                                   args.end(), [&](const std::string& a) {
                                     return a == flag || a.rfind(flag + "=", 0) == 0;
                                   });
    if (given) continue;
    injected.push_back(flag + "=" + value);
  }
  args.insert(args.begin() + static_cast<std::ptrdiff_t>(sub_pos) + 1, injected.begin(),
              injected.end());
}

}  // namespace

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Signal, noise and rank-agreement analysis for benchmark score tables", "signoise"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Help for every subcommand");

  const std::vector<Spec> specs{
      {"validate", "Ingest and validate inputs; print row counts", cmd_validate},
      {"snr", "Signal-to-noise ratio per benchmark", cmd_snr},
      {"noise", "Per-model noise (final-n rel std, total variation, seed, data order)", cmd_noise},
      {"signal", "Population spread of final scores", cmd_signal},
      {"decision-acc", "Decision accuracy, Kendall tau, Spearman rho between scales",
       cmd_decision_acc},
      {"scaling-fit", "Fit the loss/metric scaling chain and score the target", cmd_scaling_fit},
      {"scaling-predict", "Fit the scaling chain and predict at given (N, D)",
       cmd_scaling_predict},
      {"filter-subtasks", "Greedy high-SNR subtask selection trace", cmd_filter_subtasks},
      {"average", "Mean of each model's final k checkpoints", cmd_average},
      {"ema", "EMA-smoothed curves", cmd_ema},
      {"early-stop", "Decision accuracy of intermediate vs final rankings", cmd_early_stop},
      {"min-n", "Smallest checkpoint count for a std tolerance", cmd_min_n, false},
      {"within-tolerance", "Empirical likelihood that n checkpoints estimate the std",
       cmd_within_tolerance},
      {"resample", "Decision accuracy over random final-window checkpoint draws", cmd_resample},
      {"subsample", "Aggregates over a random instance subset", cmd_subsample},
      {"metric-compare", "SNR, decision accuracy and scaling error for two metrics",
       cmd_metric_compare},
      {"synth", "Write a synthetic dataset with known ground truth", cmd_synth, false},
      {"correlate", "Plot data and Pearson r between two report columns", cmd_correlate, false},
  };

  std::map<const CLI::App*, const Spec*> by_app;
  for (const auto& spec : specs) {
    auto* sub = app.add_subcommand(spec.name, spec.help);
    by_app[sub] = &spec;
    add_output(sub, o);
    const std::string name = spec.name;
    if (spec.store) {
      add_store(sub, o);
      add_selection(sub, o);
    }
    if (name == "noise")
      sub->add_option("--kind", o.noise_kind, "Noise kind")
          ->check(CLI::IsMember({"final_n", "total_variation", "seed", "data_order"}))
          ->capture_default_str();
    if (name == "signal")
      sub->add_option("--measure", o.measures, "Spread measure(s), or 'all'")->delimiter(',');
    if (name == "decision-acc" || name == "filter-subtasks" || name == "resample" ||
        name == "metric-compare")
      add_pairs(sub, o);
    if (name == "decision-acc") {
      sub->add_option("--scoring", o.scoring, "final, avg-small, avg-large, avg-both or all")
          ->delimiter(',');
      sub->add_option("--ties", o.ties, "Tie handling")
          ->check(CLI::IsMember({"half", "error"}))
          ->capture_default_str();
    }
    if (name == "scaling-fit" || name == "scaling-predict" || name == "metric-compare")
      add_scaling(sub, o);
    if (name == "scaling-predict") {
      sub->add_option("--params", o.params, "Parameter counts")->delimiter(',');
      sub->add_option("--tokens", o.tokens, "Token counts")->delimiter(',');
    }
    if (name == "filter-subtasks") {
      sub->add_option("--target", o.target, "Target model for noise tracking");
      sub->add_option("--target-window", o.target_window, "Final checkpoints for target noise")
          ->capture_default_str();
    }
    if (name == "filter-subtasks" || name == "within-tolerance")
      sub->add_option("--trials", o.trials, "Random trials (default 10 / 10000)");
    if (name == "early-stop") {
      sub->add_option("--step", o.steps, "Steps to evaluate (default: all)")->delimiter(',');
      sub->add_option("--smoothing", o.smoothing, "none, ema or both")
          ->check(CLI::IsMember({"none", "ema", "both"}))
          ->capture_default_str();
    }
    if (name == "min-n" || name == "within-tolerance")
      sub->add_option("--k", o.ks, "Relative tolerance(s)")->delimiter(',');
    if (name == "min-n")
      sub->add_option("--alpha", o.alphas, "Confidence level(s)")->delimiter(',');
    if (name == "within-tolerance") {
      sub->add_option("--target", o.target, "Model whose curve is sampled");
      sub->add_option("--n", o.ns, "Subset size(s)")->delimiter(',');
      sub->add_option("--window", o.window, "Final checkpoints to sample from (0 = all)");
    }
    if (name == "resample") {
      sub->add_option("--window", o.window, "Final checkpoints to draw from (default 5)");
      sub->add_option("--draws", o.draws, "Number of draws")->capture_default_str();
    }
    if (name == "subsample")
      sub->add_option("--m", o.m, "Instances per subsample")->required();
    if (name == "metric-compare") {
      sub->add_option("--metric-a", o.metric_a, "First metric")->capture_default_str();
      sub->add_option("--metric-b", o.metric_b, "Second metric")->capture_default_str();
    }
    if (name == "synth") {
      sub->add_option("--recipes", o.demo.recipes, "Recipes per scale")->capture_default_str();
      sub->add_option("--steps", o.demo.steps, "Checkpoints per curve")->capture_default_str();
      sub->add_option("--subtasks", o.demo.subtasks, "Subtasks of the composite benchmark")
          ->capture_default_str();
      sub->add_option("--clean-subtasks", o.demo.clean_subtasks, "High-SNR subtasks")
          ->capture_default_str();
      sub->add_option("--instances", o.demo.instances, "Instances per checkpoint")
          ->capture_default_str();
      sub->add_option("--data-format", o.data_format, "Measurement file format")
          ->check(CLI::IsMember({"csv", "jsonl"}))
          ->capture_default_str();
    }
    if (name == "correlate") {
      sub->add_option("--input", o.inputs, "Report CSV files joined on the label column")
          ->delimiter(',');
      sub->add_option("--x", o.x_col, "Column for x");
      sub->add_option("--y", o.y_col, "Column for y");
      sub->add_option("--label", o.label_col, "Join/label column")->capture_default_str();
      sub->add_option("--x-scale", o.x_scale, "auto (log10 for snr), linear or log10")
          ->check(CLI::IsMember({"auto", "linear", "log10"}))
          ->capture_default_str();
    }
  }

  std::vector<std::string> args = raw_args;
  try {
    read_config(app, args);
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\nRun 'signoise --help' for usage.\n";
    return 2;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }

  const Spec* spec = nullptr;
  for (const auto* sub : app.get_subcommands()) spec = by_app.at(sub);
  try {
    const Table table = spec->run(o);
    const auto text =
        report::render(table, o.format == "json" ? report::OutputFormat::json
                                                 : report::OutputFormat::csv);
    if (o.out.empty() || std::string(spec->name) == "synth")
      out << text;
    else
      io::write_file_atomic(o.out, text);
    return 0;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace signoise::cli
