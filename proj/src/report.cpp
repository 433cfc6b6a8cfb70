#include "signoise/report.hpp"

#include <cmath>
#include <sstream>

#include <json.hpp>

#include "signoise/errors.hpp"
#include "signoise/io.hpp"
#include "signoise/stat_kernels.hpp"

namespace signoise::report {

void Table::add(std::vector<Cell> row) {
  if (row.size() != columns.size()) throw std::logic_error("row width does not match header");
  rows.push_back(std::move(row));
}

namespace {

std::string cell_text(const Cell& c) {
  struct V {
    std::string operator()(std::monostate) const { return {}; }
    std::string operator()(const std::string& s) const { return s; }
    std::string operator()(double d) const { return io::format_double(d); }
    std::string operator()(std::int64_t i) const { return std::to_string(i); }
    std::string operator()(bool b) const { return b ? "true" : "false"; }
  };
  return std::visit(V{}, c);
}

nlohmann::ordered_json cell_json(const Cell& c) {
  struct V {
    nlohmann::ordered_json operator()(std::monostate) const { return nullptr; }
    nlohmann::ordered_json operator()(const std::string& s) const { return s; }
    nlohmann::ordered_json operator()(double d) const {
      if (std::isfinite(d)) return d;
      return io::format_double(d);
    }
    nlohmann::ordered_json operator()(std::int64_t i) const { return i; }
    nlohmann::ordered_json operator()(bool b) const { return b; }
  };
  return std::visit(V{}, c);
}

Cell opt(const std::optional<double>& v) { return v ? Cell(*v) : Cell(); }

Cell count(std::size_t n) { return static_cast<std::int64_t>(n); }

}  // namespace

std::string render(const Table& table, OutputFormat format) {
  std::ostringstream out;
  if (format == OutputFormat::csv) {
    for (std::size_t i = 0; i < table.columns.size(); ++i)
      out << (i ? "," : "") << io::csv_escape(table.columns[i]);
    out << '\n';
    for (const auto& row : table.rows) {
      for (std::size_t i = 0; i < row.size(); ++i)
        out << (i ? "," : "") << io::csv_escape(cell_text(row[i]));
      out << '\n';
    }
    return out.str();
  }
  auto arr = nlohmann::ordered_json::array();
  for (const auto& row : table.rows) {
    nlohmann::ordered_json obj = nlohmann::ordered_json::object();
    for (std::size_t i = 0; i < row.size(); ++i) obj[table.columns[i]] = cell_json(row[i]);
    arr.push_back(std::move(obj));
  }
  return arr.dump(2) + "\n";
}

Table snr_table(std::span<const SnrReport> reports) {
  Table t{{"benchmark", "metric", "signal", "noise", "snr", "window_n", "population_size"}, {}};
  for (const auto& r : reports)
    t.add({r.benchmark, r.metric, r.signal, r.noise, r.snr, count(r.window_n),
           count(r.population.size())});
  return t;
}

Table agreement_table(std::span<const AgreementRow> rows) {
  Table t{{"benchmark", "metric", "scoring_variant", "decision_accuracy", "kendall_tau",
           "spearman_rho", "n_pairs", "tie_count"},
          {}};
  for (const auto& r : rows)
    t.add({r.benchmark, r.metric, r.scoring_variant, r.report.decision_accuracy,
           r.report.kendall_tau, r.report.spearman_rho, r.report.n_pairs, r.report.tie_count});
  return t;
}

Table fit_table(std::span<const ScalingFitReport> reports) {
  Table t{{"benchmark", "metric", "A", "B", "E", "alpha", "beta", "a", "b", "k", "L0", "fit_loss",
           "predicted", "actual", "rel_error", "target_noise", "within_noise_flag"},
          {}};
  for (const auto& r : reports) {
    const auto& p = r.chain.power;
    const auto& s = r.chain.sigmoid;
    t.add({r.benchmark, r.metric, p.A, p.B, p.E, p.alpha, p.beta, s.a, s.b, s.k, s.L0,
           p.fit_loss, r.predicted, r.actual, r.rel_error, r.target_noise, r.within_noise});
  }
  return t;
}

Table trace_table(const SubtaskFilterTrace& trace) {
  Table t{{"prefix_len", "subtask_added", "snr", "decision_accuracy", "target_noise",
           "baseline_mean_snr", "baseline_std_snr"},
          {}};
  for (const auto& p : trace.prefixes) {
    Cell bm, bs;
    if (trace.has_baseline) {
      bm = p.baseline_mean_snr;
      bs = p.baseline_std_snr;
    }
    t.add({count(p.prefix_len), p.subtask_added, p.snr.snr, opt(p.decision_accuracy),
           opt(p.target_noise), bm, bs});
  }
  return t;
}

Table min_n_table(std::span<const MinNRow> rows) {
  Table t{{"k", "alpha", "n"}, {}};
  for (const auto& r : rows) t.add({r.k, r.alpha, r.n ? count(*r.n) : Cell()});
  return t;
}

Table tolerance_table(std::span<const ToleranceRow> rows) {
  Table t{{"benchmark", "n", "k", "likelihood"}, {}};
  for (const auto& r : rows) t.add({r.benchmark, count(r.n), r.k, r.likelihood});
  return t;
}

Table correlation_table(std::span<const double> xs, std::span<const double> ys,
                        std::span<const std::string> labels) {
  if (xs.size() != ys.size() || xs.size() != labels.size())
    throw DomainError("correlation inputs differ in length");
  if (xs.size() < 3) throw DomainError("correlation needs at least 3 benchmarks");
  const auto c = pearson_r(xs, ys);
  Table t{{"x", "y", "label"}, {}};
  for (std::size_t i = 0; i < xs.size(); ++i) t.add({xs[i], ys[i], labels[i]});
  t.add({c.r, c.r_squared, std::string("summary")});
  return t;
}

Table metric_comparison_table(const MetricComparison& cmp) {
  Table t{{"benchmark", "metric", "signal", "noise", "snr", "decision_accuracy", "predicted",
           "actual", "rel_error"},
          {}};
  for (const auto* r : {&cmp.a, &cmp.b}) {
    Cell pred, act, err;
    if (r->scaling) {
      pred = r->scaling->predicted;
      act = r->scaling->actual;
      err = r->scaling->rel_error;
    }
    t.add({cmp.benchmark, r->metric, r->snr.signal, r->snr.noise, r->snr.snr,
           opt(r->decision_accuracy), pred, act, err});
  }
  return t;
}

Table resample_table(std::span<const double> draws) {
  Table t{{"draw", "decision_accuracy"}, {}};
  for (std::size_t i = 0; i < draws.size(); ++i) t.add({std::to_string(i), draws[i]});
  if (!draws.empty()) {
    t.add({std::string("mean"), mean(draws)});
    t.add({std::string("std"), draws.size() > 1 ? sample_std(draws) : 0.0});
  }
  return t;
}

}  // namespace signoise::report
