#include "signoise/eval_store.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <ostream>
#include <set>

#include "signoise/errors.hpp"
#include "signoise/io.hpp"

namespace signoise {

using nlohmann::json;
using nlohmann::ordered_json;

std::optional<Format> format_from_path(const std::filesystem::path& path) {
  const auto ext = path.extension().string();
  if (ext == ".csv") return Format::csv;
  if (ext == ".jsonl" || ext == ".json" || ext == ".ndjson") return Format::jsonl;
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// EvalStore

const ModelMeta* EvalStore::find_model(std::string_view model_id) const {
  auto it = std::lower_bound(models_.begin(), models_.end(), model_id,
                             [](const ModelMeta& m, std::string_view id) { return m.model_id < id; });
  if (it == models_.end() || it->model_id != model_id) return nullptr;
  return &*it;
}

const ModelMeta& EvalStore::model(std::string_view model_id) const {
  if (const auto* m = find_model(model_id)) return *m;
  throw UnknownModelError(std::string(model_id));
}

Series EvalStore::curve(std::string_view model_id, std::string_view benchmark,
                        std::string_view metric, std::string_view subtask) const {
  if (!has_model(model_id)) throw UnknownModelError(std::string(model_id));
  CurveKey key{std::string(model_id), std::string(benchmark), std::string(subtask),
               std::string(metric)};
  if (auto it = curves_.find(key); it != curves_.end()) return it->second;
  return {};
}

std::vector<std::string> EvalStore::benchmarks() const {
  std::set<std::string> out;
  for (const auto& m : measurements_) out.insert(m.benchmark);
  return {out.begin(), out.end()};
}

std::vector<std::string> EvalStore::metrics() const {
  std::set<std::string> out;
  for (const auto& m : measurements_) out.insert(m.metric);
  return {out.begin(), out.end()};
}

std::vector<std::string> EvalStore::subtasks(std::string_view benchmark) const {
  std::set<std::string> out;
  for (const auto& m : measurements_)
    if (m.benchmark == benchmark && !m.subtask.empty()) out.insert(m.subtask);
  return {out.begin(), out.end()};
}

std::vector<std::string> EvalStore::model_ids() const {
  std::vector<std::string> out;
  out.reserve(models_.size());
  for (const auto& m : models_) out.push_back(m.model_id);
  return out;
}

// ---------------------------------------------------------------------------
// StoreBuilder

namespace {

std::string where(const std::string& origin) { return origin.empty() ? "" : origin + ": "; }

std::string describe(const Measurement& m) {
  return "(model_id=" + m.model_id + ", step=" + std::to_string(m.step) +
         ", benchmark=" + m.benchmark + ", subtask=" + m.subtask + ", metric=" + m.metric + ")";
}

std::string describe(const InstanceRecord& r) {
  return "(model_id=" + r.model_id + ", step=" + std::to_string(r.step) +
         ", benchmark=" + r.benchmark + ", subtask=" + r.subtask +
         ", instance_id=" + r.instance_id + ")";
}

}  // namespace

void StoreBuilder::add_model(ModelMeta meta, std::string origin) {
  const auto fail = [&](const std::string& msg) {
    throw DomainError(where(origin) + "model '" + meta.model_id + "': " + msg);
  };
  if (meta.model_id.empty()) fail("empty model_id");
  if (!(std::isfinite(meta.params) && meta.params > 0)) fail("params must be > 0");
  if (!(std::isfinite(meta.tokens) && meta.tokens > 0)) fail("tokens must be > 0");
  if (meta.flops == 0.0) meta.flops = 6.0 * meta.params * meta.tokens;
  if (!(std::isfinite(meta.flops) && meta.flops > 0)) fail("flops must be > 0");
  models_.emplace_back(std::move(meta), std::move(origin));
}

void StoreBuilder::add_measurement(Measurement m, std::string origin) {
  if (m.model_id.empty() || m.benchmark.empty() || m.metric.empty())
    throw DomainError(where(origin) + "model_id, benchmark and metric must be non-empty");
  if (m.step < 0) throw DomainError(where(origin) + "negative step in " + describe(m));
  if (!std::isfinite(m.value)) throw DomainError(where(origin) + "non-finite value in " + describe(m));
  measurements_.emplace_back(std::move(m), std::move(origin));
}

void StoreBuilder::add_instance(InstanceRecord r, std::string origin) {
  if (r.model_id.empty() || r.benchmark.empty() || r.instance_id.empty())
    throw DomainError(where(origin) + "model_id, benchmark and instance_id must be non-empty");
  if (r.step < 0) throw DomainError(where(origin) + "negative step in " + describe(r));
  if (r.num_bytes < 1) throw DomainError(where(origin) + "num_bytes must be >= 1 in " + describe(r));
  if (!(std::isfinite(r.nll_nats) && r.nll_nats >= 0))
    throw DomainError(where(origin) + "nll_nats must be finite and >= 0 in " + describe(r));
  if (!std::isfinite(r.primary_score))
    throw DomainError(where(origin) + "non-finite primary_score in " + describe(r));
  instances_.emplace_back(std::move(r), std::move(origin));
}

EvalStore StoreBuilder::build() && {
  EvalStore store;

  std::sort(models_.begin(), models_.end(),
            [](const auto& a, const auto& b) { return a.first.model_id < b.first.model_id; });
  for (std::size_t i = 1; i < models_.size(); ++i)
    if (models_[i].first.model_id == models_[i - 1].first.model_id)
      throw DuplicateKeyError(where(models_[i].second) + "duplicate model_id '" +
                              models_[i].first.model_id + "'");
  store.models_.reserve(models_.size());
  for (auto& [m, origin] : models_) store.models_.push_back(std::move(m));

  const auto key_less = [](const Measurement& a, const Measurement& b) {
    return std::tie(a.model_id, a.benchmark, a.subtask, a.metric, a.step) <
           std::tie(b.model_id, b.benchmark, b.subtask, b.metric, b.step);
  };
  std::stable_sort(measurements_.begin(), measurements_.end(),
                   [&](const auto& a, const auto& b) { return key_less(a.first, b.first); });
  for (std::size_t i = 0; i < measurements_.size(); ++i) {
    const auto& [m, origin] = measurements_[i];
    if (!store.has_model(m.model_id))
      throw UnknownModelError(m.model_id, where(origin) + "measurement references ");
    if (i > 0 && !key_less(measurements_[i - 1].first, m))
      throw DuplicateKeyError(where(origin) + "duplicate measurement key " + describe(m) +
                              " (first seen at " + measurements_[i - 1].second + ")");
  }
  store.measurements_.reserve(measurements_.size());
  for (auto& [m, origin] : measurements_) store.measurements_.push_back(std::move(m));
  for (const auto& m : store.measurements_)
    store.curves_[CurveKey{m.model_id, m.benchmark, m.subtask, m.metric}].push_back({m.step, m.value});

  const auto inst_less = [](const InstanceRecord& a, const InstanceRecord& b) {
    return std::tie(a.model_id, a.step, a.benchmark, a.subtask, a.instance_id) <
           std::tie(b.model_id, b.step, b.benchmark, b.subtask, b.instance_id);
  };
  std::stable_sort(instances_.begin(), instances_.end(),
                   [&](const auto& a, const auto& b) { return inst_less(a.first, b.first); });
  for (std::size_t i = 0; i < instances_.size(); ++i) {
    const auto& [r, origin] = instances_[i];
    if (!store.has_model(r.model_id))
      throw UnknownModelError(r.model_id, where(origin) + "instance references ");
    if (i > 0 && !inst_less(instances_[i - 1].first, r))
      throw DuplicateKeyError(where(origin) + "duplicate instance key " + describe(r));
  }
  store.instances_.reserve(instances_.size());
  for (auto& [r, origin] : instances_) store.instances_.push_back(std::move(r));

  models_.clear();
  measurements_.clear();
  instances_.clear();
  return store;
}

// ---------------------------------------------------------------------------
// Readers

namespace {

std::string origin_of(const std::string& source, std::size_t line) {
  return source + ":" + std::to_string(line);
}

/// Row accessor shared by the CSV and JSONL paths.
class Row {
 public:
  virtual ~Row() = default;
  virtual std::optional<std::string> text(std::string_view field) const = 0;
  virtual std::optional<double> number(std::string_view field) const = 0;
  virtual std::optional<std::int64_t> integer(std::string_view field) const = 0;
  virtual bool present(std::string_view field) const = 0;

  const std::string& source() const { return source_; }
  std::size_t line() const { return line_; }

  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(source_, line_, msg); }

  std::string req_text(std::string_view field) const {
    auto v = text(field);
    if (!v || v->empty()) fail("missing value for '" + std::string(field) + "'");
    return *v;
  }
  std::string opt_text(std::string_view field) const { return text(field).value_or(""); }
  double req_number(std::string_view field) const {
    if (!present(field)) fail("missing value for '" + std::string(field) + "'");
    auto v = number(field);
    if (!v) fail("malformed number in '" + std::string(field) + "'");
    return *v;
  }
  std::int64_t req_integer(std::string_view field) const {
    if (!present(field)) fail("missing value for '" + std::string(field) + "'");
    auto v = integer(field);
    if (!v) fail("malformed integer in '" + std::string(field) + "'");
    return *v;
  }
  std::optional<double> opt_number(std::string_view field) const {
    if (!present(field)) return std::nullopt;
    auto v = number(field);
    if (!v) fail("malformed number in '" + std::string(field) + "'");
    return v;
  }
  std::optional<std::int64_t> opt_integer(std::string_view field) const {
    if (!present(field)) return std::nullopt;
    auto v = integer(field);
    if (!v) fail("malformed integer in '" + std::string(field) + "'");
    return v;
  }

 protected:
  Row(std::string source, std::size_t line) : source_(std::move(source)), line_(line) {}

 private:
  std::string source_;
  std::size_t line_;
};

class CsvRow final : public Row {
 public:
  CsvRow(const io::CsvHeader& header, const io::CsvRecord& rec, const std::string& source)
      : Row(source, rec.line), header_(header), rec_(rec) {
    if (rec.fields.size() != header.width())
      fail("expected " + std::to_string(header.width()) + " fields, found " +
           std::to_string(rec.fields.size()));
  }
  std::optional<std::string> text(std::string_view field) const override {
    if (auto idx = header_.find(field)) return rec_.fields[*idx];
    return std::nullopt;
  }
  std::optional<double> number(std::string_view field) const override {
    auto t = text(field);
    return t ? io::parse_double(*t) : std::nullopt;
  }
  std::optional<std::int64_t> integer(std::string_view field) const override {
    auto t = text(field);
    return t ? io::parse_int(*t) : std::nullopt;
  }
  bool present(std::string_view field) const override {
    auto t = text(field);
    return t && !t->empty();
  }

 private:
  const io::CsvHeader& header_;
  const io::CsvRecord& rec_;
};

class JsonRow final : public Row {
 public:
  JsonRow(const json& obj, const FieldMap& field_map, const std::string& source, std::size_t line)
      : Row(source, line), obj_(obj), field_map_(field_map) {
    if (!obj.is_object()) fail("expected a JSON object");
  }
  std::optional<std::string> text(std::string_view field) const override {
    const json* v = get(field);
    if (!v || v->is_null()) return std::nullopt;
    if (v->is_string()) return v->get<std::string>();
    if (v->is_number_integer()) return std::to_string(v->get<std::int64_t>());
    if (v->is_number()) return io::format_double(v->get<double>());
    fail("field '" + std::string(field) + "' must be a string");
  }
  std::optional<double> number(std::string_view field) const override {
    const json* v = get(field);
    if (!v) return std::nullopt;
    if (v->is_number()) return v->get<double>();
    if (v->is_string()) return io::parse_double(v->get<std::string>());
    return std::nullopt;
  }
  std::optional<std::int64_t> integer(std::string_view field) const override {
    const json* v = get(field);
    if (!v) return std::nullopt;
    if (v->is_number_integer()) return v->get<std::int64_t>();
    if (v->is_number_float()) {
      const double d = v->get<double>();
      if (std::isfinite(d) && d == std::floor(d) && std::fabs(d) < 9.0e18)
        return static_cast<std::int64_t>(d);
      return std::nullopt;
    }
    if (v->is_string()) return io::parse_int(v->get<std::string>());
    return std::nullopt;
  }
  bool present(std::string_view field) const override {
    const json* v = get(field);
    return v && !v->is_null() && !(v->is_string() && v->get<std::string>().empty());
  }

 private:
  const json* get(std::string_view field) const {
    std::string key(field);
    if (auto it = field_map_.find(key); it != field_map_.end()) key = it->second;
    auto it = obj_.find(key);
    return it == obj_.end() ? nullptr : &*it;
  }
  const json& obj_;
  const FieldMap& field_map_;
};

template <class OnRow>
void for_each_row(std::istream& in, Format format, const std::string& source,
                  const FieldMap& field_map, std::span<const std::string_view> required,
                  OnRow&& on_row) {
  if (format == Format::csv) {
    io::CsvReader reader(in, source);
    auto header_rec = reader.next();
    if (!header_rec) throw ParseError(source, 1, "empty file (a header row is required)");
    io::CsvHeader header(*header_rec, field_map);
    for (auto field : required) header.require(field, source);
    while (auto rec = reader.next()) {
      if (rec->fields.size() == 1 && rec->fields[0].empty()) continue;  // blank line
      on_row(CsvRow(header, *rec, source));
    }
    return;
  }
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(source, lineno, std::string("invalid JSON: ") + e.what());
    }
    on_row(JsonRow(obj, field_map, source, lineno));
  }
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open input file '" + path.string() + "'");
  return in;
}

Format resolve_format(const std::filesystem::path& path, std::optional<Format> format) {
  if (format) return *format;
  if (auto f = format_from_path(path)) return *f;
  throw Error("cannot infer format of '" + path.string() + "' (use .csv or .jsonl)");
}

constexpr std::string_view kModelRequired[] = {"model_id", "params", "tokens"};
constexpr std::string_view kMeasurementRequired[] = {"model_id", "step", "benchmark", "metric",
                                                     "value"};
constexpr std::string_view kInstanceRequired[] = {"model_id",      "step",     "benchmark",
                                                  "instance_id",   "primary_score",
                                                  "nll_nats",      "num_bytes"};

}  // namespace

void read_models(StoreBuilder& builder, std::istream& in, Format format, const std::string& source,
                 const FieldMap& field_map) {
  for_each_row(in, format, source, field_map, kModelRequired, [&](const Row& row) {
    ModelMeta m;
    m.model_id = row.req_text("model_id");
    m.group = row.opt_text("group");
    m.params = row.req_number("params");
    m.tokens = row.req_number("tokens");
    m.flops = row.opt_number("flops").value_or(0.0);
    if (row.present("flops") && !(m.flops > 0)) row.fail("flops must be > 0");
    m.seed = row.opt_integer("seed");
    m.data_order_seed = row.opt_integer("data_order_seed");
    if (!(m.params > 0)) row.fail("params must be > 0");
    if (!(m.tokens > 0)) row.fail("tokens must be > 0");
    builder.add_model(std::move(m), origin_of(row.source(), row.line()));
  });
}

void read_measurements(StoreBuilder& builder, std::istream& in, Format format,
                       const std::string& source, const FieldMap& field_map) {
  for_each_row(in, format, source, field_map, kMeasurementRequired, [&](const Row& row) {
    Measurement m;
    m.model_id = row.req_text("model_id");
    m.step = row.req_integer("step");
    m.benchmark = row.req_text("benchmark");
    m.subtask = row.opt_text("subtask");
    m.metric = row.req_text("metric");
    m.value = row.req_number("value");
    if (m.step < 0) row.fail("step must be >= 0");
    if (!std::isfinite(m.value)) row.fail("value must be finite");
    builder.add_measurement(std::move(m), origin_of(row.source(), row.line()));
  });
}

void read_instances(StoreBuilder& builder, std::istream& in, Format format,
                    const std::string& source, const FieldMap& field_map) {
  for_each_row(in, format, source, field_map, kInstanceRequired, [&](const Row& row) {
    InstanceRecord r;
    r.model_id = row.req_text("model_id");
    r.step = row.req_integer("step");
    r.benchmark = row.req_text("benchmark");
    r.subtask = row.opt_text("subtask");
    r.instance_id = row.req_text("instance_id");
    r.primary_score = row.req_number("primary_score");
    r.nll_nats = row.req_number("nll_nats");
    r.num_bytes = row.req_integer("num_bytes");
    if (r.num_bytes < 1) row.fail("num_bytes must be >= 1");
    if (!(r.nll_nats >= 0) || !std::isfinite(r.nll_nats)) row.fail("nll_nats must be >= 0");
    builder.add_instance(std::move(r), origin_of(row.source(), row.line()));
  });
}

void read_models(StoreBuilder& builder, const std::filesystem::path& path,
                 std::optional<Format> format, const FieldMap& field_map) {
  auto in = open_input(path);
  read_models(builder, in, resolve_format(path, format), path.string(), field_map);
}

void read_measurements(StoreBuilder& builder, const std::filesystem::path& path,
                       std::optional<Format> format, const FieldMap& field_map) {
  auto in = open_input(path);
  read_measurements(builder, in, resolve_format(path, format), path.string(), field_map);
}

void read_instances(StoreBuilder& builder, const std::filesystem::path& path,
                    std::optional<Format> format, const FieldMap& field_map) {
  auto in = open_input(path);
  read_instances(builder, in, resolve_format(path, format), path.string(), field_map);
}

EvalStore ingest(const IngestPaths& paths, std::optional<Format> format, const FieldMap& field_map) {
  StoreBuilder builder;
  // Model metadata is always tabular; the format override applies to result files.
  for (const auto& p : paths.models) read_models(builder, p, std::nullopt, field_map);
  for (const auto& p : paths.measurements) read_measurements(builder, p, format, field_map);
  for (const auto& p : paths.instances) read_instances(builder, p, std::nullopt, field_map);
  return std::move(builder).build();
}

// ---------------------------------------------------------------------------
// Writers

namespace {

void write_csv_row(std::ostream& out, std::initializer_list<std::string> fields) {
  bool first = true;
  for (const auto& f : fields) {
    if (!first) out << ',';
    out << io::csv_escape(f);
    first = false;
  }
  out << '\n';
}

std::string opt_int(const std::optional<std::int64_t>& v) {
  return v ? std::to_string(*v) : std::string();
}

}  // namespace

void write_models(std::ostream& out, std::span<const ModelMeta> models, Format format) {
  if (format == Format::csv) {
    out << "model_id,group,params,tokens,flops,seed,data_order_seed\n";
    for (const auto& m : models)
      write_csv_row(out, {m.model_id, m.group, io::format_double(m.params),
                          io::format_double(m.tokens), io::format_double(m.flops),
                          opt_int(m.seed), opt_int(m.data_order_seed)});
    return;
  }
  for (const auto& m : models) {
    ordered_json j;
    j["model_id"] = m.model_id;
    j["group"] = m.group;
    j["params"] = m.params;
    j["tokens"] = m.tokens;
    j["flops"] = m.flops;
    j["seed"] = m.seed ? ordered_json(*m.seed) : ordered_json(nullptr);
    j["data_order_seed"] = m.data_order_seed ? ordered_json(*m.data_order_seed) : ordered_json(nullptr);
    out << j.dump() << '\n';
  }
}

void write_measurements(std::ostream& out, std::span<const Measurement> rows, Format format) {
  if (format == Format::csv) {
    out << "model_id,step,benchmark,subtask,metric,value\n";
    for (const auto& m : rows)
      write_csv_row(out, {m.model_id, std::to_string(m.step), m.benchmark, m.subtask, m.metric,
                          io::format_double(m.value)});
    return;
  }
  for (const auto& m : rows) {
    ordered_json j;
    j["model_id"] = m.model_id;
    j["step"] = m.step;
    j["benchmark"] = m.benchmark;
    j["subtask"] = m.subtask;
    j["metric"] = m.metric;
    j["value"] = m.value;
    out << j.dump() << '\n';
  }
}

void write_instances(std::ostream& out, std::span<const InstanceRecord> rows, Format format) {
  if (format == Format::csv) {
    out << "model_id,step,benchmark,subtask,instance_id,primary_score,nll_nats,num_bytes\n";
    for (const auto& r : rows)
      write_csv_row(out, {r.model_id, std::to_string(r.step), r.benchmark, r.subtask,
                          r.instance_id, io::format_double(r.primary_score),
                          io::format_double(r.nll_nats), std::to_string(r.num_bytes)});
    return;
  }
  for (const auto& r : rows) {
    ordered_json j;
    j["model_id"] = r.model_id;
    j["step"] = r.step;
    j["benchmark"] = r.benchmark;
    j["subtask"] = r.subtask;
    j["instance_id"] = r.instance_id;
    j["primary_score"] = r.primary_score;
    j["nll_nats"] = r.nll_nats;
    j["num_bytes"] = r.num_bytes;
    out << j.dump() << '\n';
  }
}

// ---------------------------------------------------------------------------
// Queries

std::vector<double> final_window(std::span<const Point> series, std::size_t n) {
  if (n == 0) throw DomainError("window size must be positive");
  if (series.size() < n) throw InsufficientCheckpointsError(series.size(), n);
  std::vector<double> out;
  out.reserve(n);
  for (std::size_t i = series.size() - n; i < series.size(); ++i) out.push_back(series[i].value);
  return out;
}

CurveMap macro_average(const EvalStore& store, std::span<const TaskRef> tasks,
                       std::string_view metric, MissingPolicy policy) {
  if (tasks.empty()) throw DomainError("macro_average needs at least one benchmark");
  CurveMap out;
  for (const auto& model : store.models()) {
    // step -> (sum, count)
    std::map<std::int64_t, std::pair<double, std::size_t>> acc;
    for (const auto& task : tasks) {
      for (const auto& p : store.curve(model.model_id, task.benchmark, metric, task.subtask)) {
        auto& slot = acc[p.step];
        slot.first += p.value;
        ++slot.second;
      }
    }
    Series s;
    for (const auto& [step, sc] : acc) {
      if (policy == MissingPolicy::strict && sc.second != tasks.size()) continue;
      s.push_back({step, sc.first / static_cast<double>(sc.second)});
    }
    if (!s.empty()) out.emplace(model.model_id, std::move(s));
  }
  return out;
}

CurveMap macro_average(const EvalStore& store, std::span<const std::string> benchmarks,
                       std::string_view metric, MissingPolicy policy) {
  std::vector<TaskRef> tasks;
  tasks.reserve(benchmarks.size());
  for (const auto& b : benchmarks) tasks.push_back({b, {}});
  return macro_average(store, tasks, metric, policy);
}

std::vector<std::string> select_population(const EvalStore& store, double target_flops,
                                           double tol) {
  if (!(tol >= 0)) throw DomainError("population tolerance must be >= 0");
  if (!(target_flops > 0)) throw DomainError("target FLOPs must be > 0");
  std::vector<std::string> out;
  for (const auto& m : store.models())
    if (std::fabs(m.flops - target_flops) / target_flops <= tol) out.push_back(m.model_id);
  return out;
}

}  // namespace signoise
