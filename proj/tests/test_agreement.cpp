#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "signoise/agreement.hpp"
#include "signoise/errors.hpp"
#include "signoise/rng.hpp"

using namespace signoise;

namespace {

PairedScores ps(std::vector<double> s, std::vector<double> l) {
  PairedScores p;
  for (std::size_t i = 0; i < s.size(); ++i) p.labels.push_back("g" + std::to_string(i));
  p.small = std::move(s);
  p.large = std::move(l);
  return p;
}

std::vector<double> distinct(Rng& rng, std::size_t n) {
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = static_cast<double>(i) + 0.5 * rng.uniform();
  shuffle(std::span<double>(v), rng);
  return v;
}

EvalStore two_scale_store(const std::vector<std::vector<double>>& small,
                          const std::vector<std::vector<double>>& large) {
  StoreBuilder b;
  for (std::size_t g = 0; g < small.size(); ++g) {
    const std::string grp = "g" + std::to_string(g);
    b.add_model({grp + "-s", grp, 1e8, 1e9, 0, {}, {}});
    b.add_model({grp + "-l", grp, 1e9, 1e10, 0, {}, {}});
    for (std::size_t t = 0; t < small[g].size(); ++t)
      b.add_measurement({grp + "-s", static_cast<std::int64_t>(t), "qa", "", "primary", small[g][t]});
    for (std::size_t t = 0; t < large[g].size(); ++t)
      b.add_measurement({grp + "-l", static_cast<std::int64_t>(t), "qa", "", "primary", large[g][t]});
  }
  return std::move(b).build();
}

}  // namespace

TEST(DecisionAccuracy, Examples) {
  EXPECT_NEAR(decision_accuracy(ps({1, 2, 3}, {1, 3, 2})), 2.0 / 3.0, 1e-15);
  EXPECT_EQ(decision_accuracy(ps({1, 2, 3}, {1, 2, 3})), 1.0);
  EXPECT_EQ(decision_accuracy(ps({1, 2, 3}, {3, 2, 1})), 0.0);
  EXPECT_EQ(decision_accuracy(ps({1, 1, 3}, {1, 2, 3})), (2 + 0.5) / 3);
  EXPECT_THROW(decision_accuracy(ps({1, 1, 3}, {1, 2, 3}), TiePolicy::error), TieError);
  EXPECT_THROW(decision_accuracy(ps({1}, {1})), DomainError);
  auto dup = ps({1, 2}, {1, 2});
  dup.labels = {"x", "x"};
  EXPECT_THROW(decision_accuracy(dup), DomainError);
}

TEST(KendallSpearman, Examples) {
  EXPECT_NEAR(kendall_tau(ps({1, 2, 3}, {1, 3, 2})), 1.0 / 3.0, 1e-15);
  EXPECT_EQ(kendall_tau(ps({1, 2, 3}, {1, 2, 3})), 1.0);
  EXPECT_EQ(kendall_tau(ps({1, 2, 3}, {3, 2, 1})), -1.0);
  EXPECT_THROW(kendall_tau(ps({1, 1, 3}, {1, 2, 3})), TieError);
  EXPECT_NEAR(spearman_rho(ps({1, 2, 3}, {1, 3, 2})), 0.5, 1e-15);
  EXPECT_EQ(spearman_rho(ps({1, 2, 3}, {10, 20, 30})), 1.0);
  EXPECT_EQ(spearman_rho(ps({1, 2, 3}, {3, 2, 1})), -1.0);
  EXPECT_EQ(spearman_rho(ps({1, 2}, {2, 1})), -1.0);
  // ties: Pearson correlation of average ranks
  EXPECT_NEAR(spearman_rho(ps({1, 1, 2}, {1, 2, 3})), std::sqrt(3.0) / 2, 1e-15);
  EXPECT_EQ(spearman_rho(ps({1, 1, 1}, {1, 2, 3})), 0.0);
  EXPECT_EQ(average_ranks(std::vector<double>{5, 1, 5, 3}), (std::vector<double>{3.5, 1, 3.5, 2}));
}

TEST(Agreement, IdentityAndPairCountsMatchOracle) {
  Rng rng(1234);
  for (int t = 0; t < 200; ++t) {
    const auto p = ps(distinct(rng, 25), distinct(rng, 25));
    const auto c = pair_counts(p);
    const auto o = oracle::count_pairs(p.small, p.large);
    EXPECT_EQ(c.concordant, o.concordant);
    EXPECT_EQ(c.discordant, o.discordant);
    EXPECT_EQ(c.tied, 0);
    EXPECT_EQ(2 * c.concordant - c.total(), c.concordant - c.discordant);
    EXPECT_NEAR(decision_accuracy(p), (kendall_tau(p) + 1) / 2, 1e-15);
    const auto rep = agreement(p);
    EXPECT_EQ(rep.n_pairs, 300);
    EXPECT_EQ(rep.tie_count, 0);
  }
}

TEST(Agreement, PairCountsWithTiesMatchOracle) {
  Rng rng(77);
  for (int t = 0; t < 50; ++t) {
    std::vector<double> a(30), b(30);
    for (auto& x : a) x = static_cast<double>(rng.below(6));
    for (auto& x : b) x = static_cast<double>(rng.below(6));
    const auto p = ps(a, b);
    const auto c = pair_counts(p);
    const auto o = oracle::count_pairs(a, b);
    EXPECT_EQ(c.concordant, o.concordant);
    EXPECT_EQ(c.discordant, o.discordant);
    EXPECT_EQ(c.tied, o.tied);
    EXPECT_EQ(agreement(p).tie_count, o.tied);
  }
}

TEST(Agreement, MonotoneTransformAndSymmetry) {
  Rng rng(9);
  for (int t = 0; t < 50; ++t) {
    auto p = ps(distinct(rng, 12), distinct(rng, 12));
    const double da = decision_accuracy(p);
    auto q = p;
    for (auto& x : q.small) x = std::exp(x) * 3 + 1;
    for (auto& x : q.large) x = std::cbrt(x) - 7;
    EXPECT_EQ(decision_accuracy(q), da);
    std::swap(q.small, q.large);
    EXPECT_EQ(decision_accuracy(q), da);
  }
}

TEST(Scoring, FinalAndAverage) {
  const Series c{{0, 1}, {1, 2}, {2, 3}};
  EXPECT_EQ(score_curve(c, {ScoringKind::final, 5}), 3.0);
  EXPECT_EQ(score_curve(c, {ScoringKind::avg_last_k, 2}), 2.5);
  const Series flat{{0, 0.4}, {1, 0.4}, {2, 0.4}};
  EXPECT_EQ(score_curve(flat, {ScoringKind::avg_last_k, 3}), 0.4);
  EXPECT_THROW(score_curve(c, {ScoringKind::avg_last_k, 4}), InsufficientCheckpointsError);
}

TEST(PairedScores, AlignsByGroup) {
  const auto store = two_scale_store({{0.1, 0.2}, {0.3, 0.5}, {0.2, 0.4}},
                                     {{0.5, 0.6}, {0.6, 0.9}, {0.5, 0.7}});
  const std::vector<std::string> small{"g2-s", "g0-s", "g1-s"};
  const std::vector<std::string> large{"g0-l", "g1-l", "g2-l"};
  const Scoring fin{}, avg{ScoringKind::avg_last_k, 2};
  auto p = paired_scores_from_store(store, small, large, "qa", "primary", fin, fin);
  EXPECT_EQ(p.labels, (std::vector<std::string>{"g0", "g1", "g2"}));
  EXPECT_EQ(p.small, (std::vector<double>{0.2, 0.5, 0.4}));
  EXPECT_EQ(p.large, (std::vector<double>{0.6, 0.9, 0.7}));
  p = paired_scores_from_store(store, small, large, "qa", "primary", avg, fin);
  EXPECT_NEAR(p.small[1], 0.4, 1e-15);
  const std::vector<std::string> partial{"g0-l", "g1-l"};
  EXPECT_THROW(paired_scores_from_store(store, small, partial, "qa", "primary", fin, fin), DomainError);
}

TEST(Resample, DegenerateCases) {
  const auto store = two_scale_store({{0.1, 0.3, 0.2}, {0.2, 0.1, 0.4}, {0.3, 0.2, 0.1}},
                                     {{0.3, 0.1, 0.5}, {0.1, 0.4, 0.6}, {0.2, 0.6, 0.4}});
  const std::vector<std::string> s{"g0-s", "g1-s", "g2-s"}, l{"g0-l", "g1-l", "g2-l"};
  ResampleOptions o;
  o.window = 1;
  o.draws = 20;
  const auto d = resample_decision_accuracy(store, s, l, "qa", "primary", o);
  const double fin = decision_accuracy(
      paired_scores_from_store(store, s, l, "qa", "primary", Scoring{}, Scoring{}));
  for (double x : d) EXPECT_EQ(x, fin);

  const auto flat = two_scale_store({{1, 1}, {2, 2}, {3, 3}}, {{3, 3}, {1, 1}, {2, 2}});
  o.window = 2;
  const auto e = resample_decision_accuracy(flat, s, l, "qa", "primary", o);
  for (double x : e) EXPECT_EQ(x, e.front());
  o.window = 4;
  EXPECT_THROW(resample_decision_accuracy(store, s, l, "qa", "primary", o),
               InsufficientCheckpointsError);
}

TEST(Resample, MeanMatchesExhaustiveEnumeration) {
  const std::vector<std::vector<double>> small{{0.1, 0.30}, {0.2, 0.25}, {0.28, 0.15}};
  const std::vector<std::vector<double>> large{{0.5, 0.40}, {0.45, 0.6}, {0.55, 0.42}};
  const auto store = two_scale_store(small, large);
  const std::vector<std::string> s{"g0-s", "g1-s", "g2-s"}, l{"g0-l", "g1-l", "g2-l"};
  double exact = 0;
  for (int mask = 0; mask < 64; ++mask) {
    std::vector<double> a(3), b(3);
    for (int g = 0; g < 3; ++g) {
      a[g] = small[g][(mask >> g) & 1];
      b[g] = large[g][(mask >> (g + 3)) & 1];
    }
    const auto o = oracle::count_pairs(a, b);
    exact += (o.concordant + 0.5 * o.tied) / 3.0;
  }
  exact /= 64;
  ResampleOptions o;
  o.window = 2;
  o.draws = 10000;
  o.seed = 5;
  const auto d = resample_decision_accuracy(store, s, l, "qa", "primary", o);
  double m = 0;
  for (double x : d) m += x;
  EXPECT_NEAR(m / d.size(), exact, 0.02);
}

TEST(Resample, ThreadCountDoesNotChangeOutput) {
  Rng rng(4);
  std::vector<std::vector<double>> small(8), large(8);
  for (int g = 0; g < 8; ++g)
    for (int t = 0; t < 6; ++t) {
      small[g].push_back(rng.uniform());
      large[g].push_back(rng.uniform());
    }
  const auto store = two_scale_store(small, large);
  std::vector<std::string> s, l;
  for (int g = 0; g < 8; ++g) {
    s.push_back("g" + std::to_string(g) + "-s");
    l.push_back("g" + std::to_string(g) + "-l");
  }
  ResampleOptions o;
  o.draws = 500;
  o.seed = 99;
  o.threads = 1;
  const auto a = resample_decision_accuracy(store, s, l, "qa", "primary", o);
  o.threads = 8;
  const auto b = resample_decision_accuracy(store, s, l, "qa", "primary", o);
  EXPECT_EQ(a, b);
  EXPECT_EQ(a, resample_decision_accuracy(store, s, l, "qa", "primary", o));
}
