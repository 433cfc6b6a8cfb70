#include "signoise/agreement.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "signoise/errors.hpp"
#include "signoise/metrics.hpp"
#include "signoise/parallel.hpp"
#include "signoise/rng.hpp"

namespace signoise {

void validate(const PairedScores& ps) {
  if (ps.small.size() != ps.large.size())
    throw DomainError("paired scores have different lengths");
  if (ps.small.size() < 2) throw DomainError("rank agreement needs at least 2 paired entries");
  if (!ps.labels.empty()) {
    if (ps.labels.size() != ps.small.size()) throw DomainError("label count does not match scores");
    std::set<std::string> seen(ps.labels.begin(), ps.labels.end());
    if (seen.size() != ps.labels.size()) throw DomainError("paired score labels must be unique");
  }
}

simd::PairCounts pair_counts(const PairedScores& ps) {
  validate(ps);
  return simd::count_pairs(ps.small, ps.large);
}

double decision_accuracy(const PairedScores& ps, TiePolicy policy) {
  const auto pc = pair_counts(ps);
  if (policy == TiePolicy::error && pc.tied > 0)
    throw TieError("decision accuracy: " + std::to_string(pc.tied) + " tied pair(s)");
  const double agree = static_cast<double>(pc.concordant) + 0.5 * static_cast<double>(pc.tied);
  return agree / static_cast<double>(pc.total());
}

double kendall_tau(const PairedScores& ps) {
  const auto pc = pair_counts(ps);
  if (pc.tied > 0) throw TieError("kendall_tau: " + std::to_string(pc.tied) + " tied pair(s)");
  return static_cast<double>(pc.concordant - pc.discordant) / static_cast<double>(pc.total());
}

std::vector<double> average_ranks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    const double r = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = r;
    i = j + 1;
  }
  return ranks;
}

double spearman_rho(const PairedScores& ps) {
  validate(ps);
  const auto rs = average_ranks(ps.small);
  const auto rl = average_ranks(ps.large);
  const auto n = static_cast<double>(rs.size());
  const bool ties = std::set<double>(rs.begin(), rs.end()).size() != rs.size() ||
                    std::set<double>(rl.begin(), rl.end()).size() != rl.size();
  if (!ties) {
    double d2 = 0.0;
    for (std::size_t i = 0; i < rs.size(); ++i) d2 += (rs[i] - rl[i]) * (rs[i] - rl[i]);
    return 1.0 - 6.0 * d2 / (n * (n * n - 1.0));
  }
  const double mean_rank = (n + 1.0) / 2.0;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rs.size(); ++i) {
    const double a = rs[i] - mean_rank;
    const double b = rl[i] - mean_rank;
    sxy += a * b;
    sxx += a * a;
    syy += b * b;
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

AgreementReport agreement(const PairedScores& ps) {
  AgreementReport r;
  r.counts = pair_counts(ps);
  r.n_pairs = r.counts.total();
  r.tie_count = r.counts.tied;
  const auto total = static_cast<double>(r.n_pairs);
  r.decision_accuracy =
      (static_cast<double>(r.counts.concordant) + 0.5 * static_cast<double>(r.counts.tied)) / total;
  r.kendall_tau = static_cast<double>(r.counts.concordant - r.counts.discordant) / total;
  r.spearman_rho = spearman_rho(ps);
  return r;
}

double score_curve(std::span<const Point> curve, const Scoring& scoring) {
  if (curve.empty()) throw InsufficientCheckpointsError(0, 1);
  if (scoring.kind == ScoringKind::final) return curve.back().value;
  return mean(final_window(curve, scoring.k));
}

namespace {

struct Alignment {
  std::vector<std::string> labels;
  std::vector<std::string> small;
  std::vector<std::string> large;
};

Alignment align_by_group(const EvalStore& store, std::span<const std::string> small_ids,
                         std::span<const std::string> large_ids) {
  const auto index = [&](std::span<const std::string> ids, const char* side) {
    std::map<std::string, std::string> by_group;
    for (const auto& id : ids) {
      const auto& meta = store.model(id);
      if (!by_group.emplace(meta.group, id).second)
        throw DomainError(std::string(side) + " models '" + by_group[meta.group] + "' and '" + id +
                          "' share group '" + meta.group + "'");
    }
    return by_group;
  };
  const auto small = index(small_ids, "small");
  const auto large = index(large_ids, "large");
  Alignment out;
  for (const auto& [group, id] : small) {
    auto it = large.find(group);
    if (it == large.end()) throw DomainError("group '" + group + "' has no large-scale model");
    out.labels.push_back(group);
    out.small.push_back(id);
    out.large.push_back(it->second);
  }
  for (const auto& [group, id] : large)
    if (!small.contains(group)) throw DomainError("group '" + group + "' has no small-scale model");
  return out;
}

const Series& curve_or_throw(const CurveMap& curves, const std::string& id) {
  auto it = curves.find(id);
  if (it == curves.end() || it->second.empty()) throw InsufficientCheckpointsError(0, 1, {id});
  return it->second;
}

}  // namespace

PairedScores paired_scores(const EvalStore& store, const CurveMap& curves,
                           std::span<const std::string> small_ids,
                           std::span<const std::string> large_ids, const Scoring& small_scoring,
                           const Scoring& large_scoring) {
  const auto al = align_by_group(store, small_ids, large_ids);
  PairedScores ps;
  ps.labels = al.labels;
  for (std::size_t i = 0; i < al.labels.size(); ++i) {
    const auto& sc = curve_or_throw(curves, al.small[i]);
    const auto& lc = curve_or_throw(curves, al.large[i]);
    if (small_scoring.kind == ScoringKind::avg_last_k && sc.size() < small_scoring.k)
      throw InsufficientCheckpointsError(sc.size(), small_scoring.k, {al.small[i]});
    if (large_scoring.kind == ScoringKind::avg_last_k && lc.size() < large_scoring.k)
      throw InsufficientCheckpointsError(lc.size(), large_scoring.k, {al.large[i]});
    ps.small.push_back(score_curve(sc, small_scoring));
    ps.large.push_back(score_curve(lc, large_scoring));
  }
  return ps;
}

PairedScores paired_scores_from_store(const EvalStore& store,
                                      std::span<const std::string> small_ids,
                                      std::span<const std::string> large_ids,
                                      std::string_view benchmark, std::string_view metric,
                                      const Scoring& small_scoring, const Scoring& large_scoring,
                                      std::string_view subtask) {
  std::vector<std::string> all(small_ids.begin(), small_ids.end());
  all.insert(all.end(), large_ids.begin(), large_ids.end());
  return paired_scores(store, fetch_curves(store, all, benchmark, metric, subtask), small_ids,
                       large_ids, small_scoring, large_scoring);
}

std::vector<double> resample_decision_accuracy(const EvalStore& store, const CurveMap& curves,
                                               std::span<const std::string> small_ids,
                                               std::span<const std::string> large_ids,
                                               const ResampleOptions& options) {
  if (options.draws == 0) throw DomainError("resampling needs at least one draw");
  if (options.window == 0) throw DomainError("resampling window must be positive");
  const auto al = align_by_group(store, small_ids, large_ids);
  const std::size_t groups = al.labels.size();

  // Windows laid out as [small_0 .. small_{g-1}, large_0 .. large_{g-1}].
  std::vector<std::vector<double>> windows;
  windows.reserve(2 * groups);
  std::vector<std::string> offenders;
  std::size_t shortest = options.window;
  for (const auto* side : {&al.small, &al.large})
    for (const auto& id : *side) {
      const auto& c = curves.contains(id) ? curves.at(id) : Series{};
      if (c.size() < options.window) {
        offenders.push_back(id);
        shortest = std::min(shortest, c.size());
        windows.emplace_back();
      } else {
        windows.push_back(final_window(c, options.window));
      }
    }
  if (!offenders.empty())
    throw InsufficientCheckpointsError(shortest, options.window, std::move(offenders));

  std::vector<double> out(options.draws);
  parallel_for(options.draws, options.threads, [&](std::size_t d) {
    Rng rng = Rng::stream(options.seed, d);
    PairedScores ps;
    ps.small.resize(groups);
    ps.large.resize(groups);
    for (std::size_t g = 0; g < groups; ++g) ps.small[g] = windows[g][rng.below(options.window)];
    for (std::size_t g = 0; g < groups; ++g)
      ps.large[g] = windows[groups + g][rng.below(options.window)];
    out[d] = decision_accuracy(ps, options.tie_policy);
  });
  return out;
}

std::vector<double> resample_decision_accuracy(const EvalStore& store,
                                               std::span<const std::string> small_ids,
                                               std::span<const std::string> large_ids,
                                               std::string_view benchmark,
                                               std::string_view metric,
                                               const ResampleOptions& options) {
  std::vector<std::string> all(small_ids.begin(), small_ids.end());
  all.insert(all.end(), large_ids.begin(), large_ids.end());
  return resample_decision_accuracy(store, fetch_curves(store, all, benchmark, metric), small_ids,
                                    large_ids, options);
}

}  // namespace signoise
