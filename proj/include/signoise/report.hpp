#pragma once

// Tabular report emission (CSV or JSON) for every analysis result.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "signoise/agreement.hpp"
#include "signoise/interventions.hpp"
#include "signoise/metrics.hpp"
#include "signoise/scaling_law.hpp"

namespace signoise::report {

/// Empty cells render as "" in CSV and null in JSON.
using Cell = std::variant<std::monostate, std::string, double, std::int64_t, bool>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  void add(std::vector<Cell> row);
};

enum class OutputFormat { csv, json };

/// CSV: header plus one line per row, "\n" endings, shortest round-trip
/// doubles. JSON: an array of objects keyed by column; non-finite doubles
/// become the strings "nan", "inf", "-inf".
std::string render(const Table& table, OutputFormat format);

Table snr_table(std::span<const SnrReport> reports);

struct AgreementRow {
  std::string benchmark;
  std::string metric;
  std::string scoring_variant;
  AgreementReport report;
};
Table agreement_table(std::span<const AgreementRow> rows);

Table fit_table(std::span<const ScalingFitReport> reports);

Table trace_table(const SubtaskFilterTrace& trace);

struct MinNRow {
  double k = 0.0;
  double alpha = 0.0;
  std::optional<std::size_t> n;
};
Table min_n_table(std::span<const MinNRow> rows);

struct ToleranceRow {
  std::string benchmark;
  std::size_t n = 0;
  double k = 0.0;
  double likelihood = 0.0;
};
Table tolerance_table(std::span<const ToleranceRow> rows);

/// Rows (x, y, label) followed by a summary row with label "summary",
/// x = r and y = r². Needs at least 3 points.
Table correlation_table(std::span<const double> xs, std::span<const double> ys,
                        std::span<const std::string> labels);

Table metric_comparison_table(const MetricComparison& cmp);

/// One row per draw, then "mean" and "std" rows.
Table resample_table(std::span<const double> draws);

}  // namespace signoise::report
