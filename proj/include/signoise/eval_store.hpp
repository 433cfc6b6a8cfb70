#pragma once

// Immutable, indexed collection of per-checkpoint benchmark results and model
// metadata. Every analysis reads its curves from here.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "signoise/series.hpp"

namespace signoise {

struct ModelMeta {
  std::string model_id;
  std::string group;  // pretraining recipe / family label
  double params = 0.0;
  double tokens = 0.0;
  double flops = 0.0;  // 6·N·D when not supplied
  std::optional<std::int64_t> seed;
  std::optional<std::int64_t> data_order_seed;

  friend bool operator==(const ModelMeta&, const ModelMeta&) = default;
};

struct Measurement {
  std::string model_id;
  std::int64_t step = 0;
  std::string benchmark;
  std::string subtask;  // empty: whole benchmark
  std::string metric;
  double value = 0.0;

  friend bool operator==(const Measurement&, const Measurement&) = default;
};

struct InstanceRecord {
  std::string model_id;
  std::int64_t step = 0;
  std::string benchmark;
  std::string subtask;
  std::string instance_id;
  double primary_score = 0.0;
  double nll_nats = 0.0;
  std::int64_t num_bytes = 1;

  friend bool operator==(const InstanceRecord&, const InstanceRecord&) = default;
};

enum class Format { csv, jsonl };

/// Format from a file extension (.csv / .jsonl / .json); nullopt otherwise.
std::optional<Format> format_from_path(const std::filesystem::path& path);

/// Identifies one curve: model × benchmark × subtask × metric.
struct CurveKey {
  std::string model_id;
  std::string benchmark;
  std::string subtask;
  std::string metric;

  auto tie() const { return std::tie(model_id, benchmark, subtask, metric); }
  friend bool operator<(const CurveKey& a, const CurveKey& b) { return a.tie() < b.tie(); }
  friend bool operator==(const CurveKey&, const CurveKey&) = default;
};

class EvalStore {
 public:
  EvalStore() = default;

  /// Models sorted by model_id.
  const std::vector<ModelMeta>& models() const { return models_; }
  const ModelMeta& model(std::string_view model_id) const;
  const ModelMeta* find_model(std::string_view model_id) const;
  bool has_model(std::string_view model_id) const { return find_model(model_id) != nullptr; }

  /// All measurements, sorted by (model, benchmark, subtask, metric, step).
  std::span<const Measurement> measurements() const { return measurements_; }
  /// Instance records, sorted by (model, step, benchmark, subtask, instance).
  std::span<const InstanceRecord> instances() const { return instances_; }
  bool has_instances() const { return !instances_.empty(); }

  /// Curve for a key, steps strictly increasing. Empty when no rows match.
  /// Throws UnknownModelError if the model is not in the store.
  Series curve(std::string_view model_id, std::string_view benchmark, std::string_view metric,
               std::string_view subtask = {}) const;

  std::vector<std::string> benchmarks() const;
  std::vector<std::string> metrics() const;
  /// Non-empty subtask names recorded for a benchmark, sorted.
  std::vector<std::string> subtasks(std::string_view benchmark) const;
  std::vector<std::string> model_ids() const;

  friend bool operator==(const EvalStore& a, const EvalStore& b) {
    return a.models_ == b.models_ && a.measurements_ == b.measurements_ &&
           a.instances_ == b.instances_;
  }

 private:
  friend class StoreBuilder;

  std::vector<ModelMeta> models_;
  std::vector<Measurement> measurements_;
  std::vector<InstanceRecord> instances_;
  std::map<CurveKey, Series> curves_;
};

/// Accumulates rows, then validates and freezes them into an EvalStore.
class StoreBuilder {
 public:
  /// `origin` is used in error messages (e.g. "models.csv:12").
  void add_model(ModelMeta meta, std::string origin = {});
  void add_measurement(Measurement m, std::string origin = {});
  void add_instance(InstanceRecord r, std::string origin = {});

  std::size_t model_count() const { return models_.size(); }
  std::size_t measurement_count() const { return measurements_.size(); }
  std::size_t instance_count() const { return instances_.size(); }

  /// Throws DuplicateKeyError, UnknownModelError or DomainError on invalid data.
  EvalStore build() &&;

 private:
  std::vector<std::pair<ModelMeta, std::string>> models_;
  std::vector<std::pair<Measurement, std::string>> measurements_;
  std::vector<std::pair<InstanceRecord, std::string>> instances_;
};

using FieldMap = std::map<std::string, std::string>;

struct IngestPaths {
  std::vector<std::filesystem::path> models;
  std::vector<std::filesystem::path> measurements;
  std::vector<std::filesystem::path> instances;
};

/// Reads the given files into `builder`. With no explicit format, each file's
/// format comes from its extension. Row errors cite file and line.
void read_models(StoreBuilder& builder, const std::filesystem::path& path,
                 std::optional<Format> format = {}, const FieldMap& field_map = {});
void read_measurements(StoreBuilder& builder, const std::filesystem::path& path,
                       std::optional<Format> format = {}, const FieldMap& field_map = {});
void read_instances(StoreBuilder& builder, const std::filesystem::path& path,
                    std::optional<Format> format = {}, const FieldMap& field_map = {});

/// Stream variants; `source` names the input in error messages.
void read_models(StoreBuilder& builder, std::istream& in, Format format, const std::string& source,
                 const FieldMap& field_map = {});
void read_measurements(StoreBuilder& builder, std::istream& in, Format format,
                       const std::string& source, const FieldMap& field_map = {});
void read_instances(StoreBuilder& builder, std::istream& in, Format format,
                    const std::string& source, const FieldMap& field_map = {});

EvalStore ingest(const IngestPaths& paths, std::optional<Format> format = {},
                 const FieldMap& field_map = {});

void write_models(std::ostream& out, std::span<const ModelMeta> models, Format format);
void write_measurements(std::ostream& out, std::span<const Measurement> rows, Format format);
void write_instances(std::ostream& out, std::span<const InstanceRecord> rows, Format format);

/// Same as EvalStore::curve. Named for the query it answers.
inline Series query_curve(const EvalStore& store, std::string_view model_id,
                          std::string_view benchmark, std::string_view metric,
                          std::string_view subtask = {}) {
  return store.curve(model_id, benchmark, metric, subtask);
}

/// Values of the n largest steps, in step order.
std::vector<double> final_window(std::span<const Point> series, std::size_t n);

enum class MissingPolicy {
  strict,     // a model missing any component at a step gets no value at that step
  available,  // mean over the components present at that step
};

struct TaskRef {
  std::string benchmark;
  std::string subtask;
};

/// Unweighted mean across components per (model, step). Models with no
/// aggregated step are omitted.
CurveMap macro_average(const EvalStore& store, std::span<const TaskRef> tasks,
                       std::string_view metric, MissingPolicy policy = MissingPolicy::strict);
CurveMap macro_average(const EvalStore& store, std::span<const std::string> benchmarks,
                       std::string_view metric, MissingPolicy policy = MissingPolicy::strict);

/// Models with |flops - target| / target <= tol, ordered by model_id.
std::vector<std::string> select_population(const EvalStore& store, double target_flops,
                                           double tol);

}  // namespace signoise
