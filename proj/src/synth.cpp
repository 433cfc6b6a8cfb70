#include "signoise/synth.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "signoise/errors.hpp"
#include "signoise/rng.hpp"

namespace signoise::synth {

double curve_trend(const CurveConfig& cfg, std::size_t t) {
  return cfg.asymptote -
         cfg.amplitude * std::pow(static_cast<double>(t) + 1.0, -cfg.decay_exponent);
}

Series generate_curve(const CurveConfig& cfg) {
  Rng rng(cfg.rng_seed);
  Series out;
  out.reserve(cfg.steps);
  for (std::size_t t = 0; t < cfg.steps; ++t) {
    const double trend = curve_trend(cfg, t);
    double v = trend;
    if (cfg.noise_rel_std > 0) {
      const double eps = cfg.noise_rel_std * rng.normal();
      v = cfg.noise_mode == NoiseMode::multiplicative ? trend * (1.0 + eps) : trend + eps;
    }
    out.push_back({static_cast<std::int64_t>(t) * cfg.step_stride, v});
  }
  return out;
}

void StoreFragment::merge(StoreFragment other) {
  std::map<std::string, const ModelMeta*> known;
  for (const auto& m : models) known.emplace(m.model_id, &m);
  std::vector<ModelMeta> fresh;
  for (auto& m : other.models) {
    auto it = known.find(m.model_id);
    if (it == known.end()) {
      fresh.push_back(std::move(m));
    } else if (!(*it->second == m)) {
      throw DuplicateKeyError("conflicting metadata for model '" + m.model_id + "'");
    }
  }
  for (auto& m : fresh) models.push_back(std::move(m));
  measurements.insert(measurements.end(), std::make_move_iterator(other.measurements.begin()),
                      std::make_move_iterator(other.measurements.end()));
  instances.insert(instances.end(), std::make_move_iterator(other.instances.begin()),
                   std::make_move_iterator(other.instances.end()));
}

EvalStore StoreFragment::build() const {
  StoreBuilder b;
  for (const auto& m : models) b.add_model(m);
  for (const auto& m : measurements) b.add_measurement(m);
  for (const auto& r : instances) b.add_instance(r);
  return std::move(b).build();
}

GeneratedPopulation generate_population(std::span<const CurveConfig> configs,
                                        std::span<const std::string> labels,
                                        const PopulationSpec& spec) {
  if (configs.size() != labels.size()) throw DomainError("one curve config per label is required");
  if (std::set<std::string>(labels.begin(), labels.end()).size() != labels.size())
    throw DomainError("population labels must be distinct");
  GeneratedPopulation out;
  out.ids_by_scale.resize(spec.scales.size());
  for (std::size_t s = 0; s < spec.scales.size(); ++s) {
    const auto& scale = spec.scales[s];
    if (!(scale.asymptote_gain > 0)) throw DomainError("asymptote_gain must be > 0");
    for (std::size_t i = 0; i < labels.size(); ++i) {
      ModelMeta meta;
      meta.model_id = labels[i] + "-" + scale.suffix;
      meta.group = labels[i];
      meta.params = scale.params;
      meta.tokens = scale.tokens;
      meta.flops = 6.0 * scale.params * scale.tokens;
      out.fragment.models.push_back(meta);
      out.ids_by_scale[s].push_back(meta.model_id);

      CurveConfig cfg = configs[i];
      cfg.asymptote = scale.asymptote_gain * cfg.asymptote + scale.asymptote_offset;
      cfg.rng_seed = splitmix64(configs[i].rng_seed ^ splitmix64(s + 1));
      for (const auto& p : generate_curve(cfg))
        out.fragment.measurements.push_back(
            {meta.model_id, p.step, spec.benchmark, spec.subtask, spec.metric, p.value});
    }
  }
  std::vector<std::size_t> order(labels.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return configs[a].asymptote > configs[b].asymptote;
  });
  for (auto i : order) out.true_ranking.push_back(labels[i]);
  return out;
}

std::vector<std::pair<double, double>> grid_product(std::span<const double> params,
                                                    std::span<const double> tokens) {
  std::vector<std::pair<double, double>> out;
  for (double n : params)
    for (double d : tokens) out.emplace_back(n, d);
  return out;
}

Ladder generate_scaling_ladder(const PowerLawFit& true_power, const SigmoidFit& true_sigmoid,
                               std::span<const std::pair<double, double>> grid,
                               std::pair<double, double> target, double noise_rel_std,
                               std::uint64_t rng_seed) {
  if (grid.empty()) throw DomainError("scaling ladder grid is empty");
  Rng rng(rng_seed);
  Ladder out;
  for (const auto& [n, d] : grid) {
    double loss = predict_loss(true_power, n, d);
    if (noise_rel_std > 0) loss *= 1.0 + noise_rel_std * rng.normal();
    out.points.push_back({n, d, loss, predict_metric(true_sigmoid, loss)});
  }
  const double tl = predict_loss(true_power, target.first, target.second);
  out.target = {target.first, target.second, tl, predict_metric(true_sigmoid, tl)};
  return out;
}

namespace {

std::string pad(std::size_t i, std::size_t width = 2) {
  std::string s = std::to_string(i);
  return std::string(width > s.size() ? width - s.size() : 0, '0') + s;
}

// BPB tracks accuracy inversely with a smaller relative jitter.
double bpb_from_accuracy(double acc) { return 1.6 - 1.2 * acc; }

}  // namespace

StoreFragment generate_demo_dataset(const DemoOptions& opt) {
  if (opt.recipes < 3) throw DomainError("demo dataset needs at least 3 recipes");
  if (opt.clean_subtasks > opt.subtasks) throw DomainError("clean_subtasks exceeds subtasks");
  StoreFragment frag;
  Rng rng(opt.seed);

  std::vector<std::string> labels;
  for (std::size_t i = 0; i < opt.recipes; ++i) labels.push_back("recipe" + pad(i));

  PopulationSpec base;
  base.scales = {
      {"150m", 1.5e8, 1.5e8 * 100, 0.85, 0.0},
      {"1b", 1.0e9, 1.0e9 * 100, 1.0, 0.0},
  };

  // Recipe quality drives every benchmark so the true ranking is shared.
  std::vector<double> quality(opt.recipes);
  for (auto& q : quality) q = rng.uniform();

  const auto add_benchmark = [&](const std::string& bench, const std::string& subtask,
                                 double base_level, double spread, double noise,
                                 std::uint64_t salt) {
    std::vector<CurveConfig> acc_cfgs, bpb_cfgs;
    for (std::size_t i = 0; i < opt.recipes; ++i) {
      CurveConfig c;
      c.asymptote = base_level + spread * quality[i];
      c.amplitude = 0.25;
      c.decay_exponent = 0.6;
      c.noise_rel_std = noise;
      c.steps = opt.steps;
      c.step_stride = 1000;
      c.rng_seed = splitmix64(opt.seed ^ splitmix64(salt * 1000003 + i));
      acc_cfgs.push_back(c);
      CurveConfig b = c;
      b.asymptote = bpb_from_accuracy(c.asymptote);
      b.amplitude = -0.3;
      b.noise_rel_std = noise / 5.0;
      b.rng_seed = splitmix64(c.rng_seed + 17);
      bpb_cfgs.push_back(b);
    }
    PopulationSpec spec = base;
    spec.benchmark = bench;
    spec.subtask = subtask;
    spec.metric = "primary";
    frag.merge(generate_population(acc_cfgs, labels, spec).fragment);
    spec.metric = "bpb";
    // Larger models have lower loss: invert the gain around the base.
    spec.scales[0].asymptote_gain = 1.08;
    frag.merge(generate_population(bpb_cfgs, labels, spec).fragment);
  };

  add_benchmark("clean_qa", "", 0.45, 0.2, 0.004, 1);
  add_benchmark("noisy_qa", "", 0.30, 0.03, 0.03, 2);
  for (std::size_t s = 0; s < opt.subtasks; ++s) {
    const bool clean = s < opt.clean_subtasks;
    add_benchmark("multi", "sub" + pad(s), clean ? 0.4 : 0.35, clean ? 0.2 : 0.01,
                  clean ? 0.005 : 0.04, 100 + s);
  }

  // Scaling ladder: one recipe across sizes and token multipliers, plus a large target.
  const PowerLawFit power{250.0, 300.0, 0.55, 0.35, 0.3, 0.0, true};
  const SigmoidFit sigmoid{0.6, 0.22, -4.0, 1.0, 0.0, true};
  const double sizes[] = {2e7, 6e7, 1.5e8, 3e8, 7e8};
  const double multipliers[] = {10.0, 20.0, 50.0};
  std::vector<std::pair<std::string, std::pair<double, double>>> ladder;
  for (std::size_t i = 0; i < std::size(sizes); ++i)
    for (std::size_t j = 0; j < std::size(multipliers); ++j)
      ladder.push_back({"ladder-" + pad(i) + "-" + pad(j), {sizes[i], sizes[i] * multipliers[j]}});
  ladder.push_back({"target-7b", {7e9, 7e9 * 20}});
  for (std::size_t m = 0; m < ladder.size(); ++m) {
    const auto& [id, nd] = ladder[m];
    const bool target = id == "target-7b";
    ModelMeta meta{id, "ladder", nd.first, nd.second, 6.0 * nd.first * nd.second, {}, {}};
    frag.models.push_back(meta);
    const std::size_t steps = target ? std::max<std::size_t>(opt.steps, 35) : opt.steps;
    const double final_loss = predict_loss(power, nd.first, nd.second);
    Rng curve_rng(splitmix64(opt.seed ^ splitmix64(5000 + m)));
    for (std::size_t t = 0; t < steps; ++t) {
      const double progress = static_cast<double>(t + 1) / static_cast<double>(steps);
      const double loss = final_loss * (1.0 + 0.15 * (1.0 - progress)) * (1.0 + 0.002 * curve_rng.normal());
      const double acc = predict_metric(sigmoid, loss) * (1.0 + 0.004 * curve_rng.normal());
      const auto step = static_cast<std::int64_t>(t) * 1000;
      frag.measurements.push_back({id, step, "clean_qa", "", "bpb", loss});
      frag.measurements.push_back({id, step, "clean_qa", "", "primary", acc});
    }
  }

  // Instance-level records for the small population on clean_qa, last 5 checkpoints.
  std::vector<double> difficulty(opt.instances);
  std::vector<std::int64_t> bytes(opt.instances);
  for (std::size_t i = 0; i < opt.instances; ++i) {
    difficulty[i] = rng.normal() * 0.15;
    bytes[i] = 4 + static_cast<std::int64_t>(rng.below(60));
  }
  std::map<std::string, std::map<std::int64_t, double>> skill;
  for (const auto& m : frag.measurements)
    if (m.benchmark == "clean_qa" && m.metric == "primary" && m.model_id.ends_with("-150m"))
      skill[m.model_id][m.step] = m.value;
  for (const auto& [model, curve] : skill) {
    std::size_t idx = 0;
    for (const auto& [step, acc] : curve) {
      if (idx++ + 5 < curve.size()) continue;
      Rng inst_rng(splitmix64(opt.seed ^ std::hash<std::string>{}(model) ^ static_cast<std::uint64_t>(step)));
      for (std::size_t i = 0; i < opt.instances; ++i) {
        const double p = std::clamp(acc - difficulty[i], 0.02, 0.98);
        InstanceRecord r;
        r.model_id = model;
        r.step = step;
        r.benchmark = "clean_qa";
        r.instance_id = "q" + pad(i, 3);
        r.primary_score = inst_rng.uniform() < p ? 1.0 : 0.0;
        r.nll_nats = -std::log(p) * static_cast<double>(bytes[i]) / 8.0;
        r.num_bytes = bytes[i];
        frag.instances.push_back(std::move(r));
      }
    }
  }
  return frag;
}

}  // namespace signoise::synth
