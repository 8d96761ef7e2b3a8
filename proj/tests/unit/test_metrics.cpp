// Copyright 2026 The seqrec Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <algorithm>
#include <cmath>

#include <gtest/gtest.h>

#include "seqrec/error.hpp"
#include "seqrec/metrics.hpp"
#include "seqrec/random.hpp"
#include "seqrec/text.hpp"
#include "testing/oracles.hpp"

namespace seqrec {
namespace {

TEST(Dcg, Examples) {
  const std::vector<std::uint8_t> r = {1, 0, 1};
  EXPECT_DOUBLE_EQ(dcg(r, 3), 1.5);
  const std::vector<std::uint8_t> zeros = {0, 0, 0, 0};
  EXPECT_EQ(dcg(zeros, 4), 0.0);
  const std::vector<std::uint8_t> one = {1};
  EXPECT_EQ(dcg(one, 1), 1.0);
  EXPECT_THROW(dcg(one, 2), Error);
}

TEST(Ndcg, Examples) {
  const std::vector<Token> ranked = {10, 11, 12, 13};
  EXPECT_EQ(ndcg(ranked, {10, 11}, 3), 1.0);
  const double v = ndcg(ranked, {10, 12}, 3);
  EXPECT_DOUBLE_EQ(v, 1.5 / (1.0 + 1.0 / std::log2(3.0)));
  EXPECT_NEAR(v, 0.9197, 5e-5);
  EXPECT_EQ(ndcg(ranked, {13}, 3), 0.0);
  EXPECT_THROW(ndcg(ranked, {}, 3), Error);
}

TEST(ApAtK, Examples) {
  const std::vector<Token> ranked = {1, 2, 3, 4};
  EXPECT_DOUBLE_EQ(ap_at_k(ranked, {1, 3}, 3), (1.0 + 2.0 / 3.0) / 2.0);
  EXPECT_NEAR(ap_at_k(ranked, {1, 3}, 3), 0.8333, 5e-5);
  EXPECT_EQ(ap_at_k(ranked, {4}, 3), 0.0);
  EXPECT_EQ(ap_at_k(ranked, {1, 2, 3}, 3), 1.0);
  // Alternative denominator: min(|relevant|, K).
  EXPECT_DOUBLE_EQ(ap_at_k(ranked, {1, 3, 4, 9}, 3, ApNormalization::kMinRelevantAndK),
                   (1.0 + 2.0 / 3.0) / 3.0);
}

TEST(Metrics, ExhaustiveOracle) {
  const auto r = testing::run_metric_oracle(6);
  EXPECT_EQ(r.mismatches, 0u) << r.first_mismatch;
  EXPECT_EQ(r.cases, 2u + 8 + 48 + 384 + 3840 + 46080);
}

TEST(Metrics, BoundsAndPerfectRankings) {
  Rng rng(1);
  for (int trial = 0; trial < 2000; ++trial) {
    const std::size_t n = 1 + rng.below(15);
    std::vector<Token> ranked(n);
    for (std::size_t i = 0; i < n; ++i) ranked[i] = static_cast<Token>(i);
    rng.shuffle(ranked);
    RelevantSet relevant;
    for (std::size_t i = 0; i < n + 3; ++i) {
      if (rng.below(3) == 0) relevant.insert(static_cast<Token>(i));
    }
    if (relevant.empty()) continue;
    const std::size_t p = 1 + rng.below(n);
    const double v = ndcg(ranked, relevant, p);
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0 + 1e-15);
    const std::size_t top = std::min(relevant.size(), p);
    bool packed = true;
    for (std::size_t k = 0; k < top; ++k) packed = packed && relevant.count(ranked[k]);
    EXPECT_EQ(std::abs(v - 1.0) < 1e-12, packed);
    const double ap = ap_at_k(ranked, relevant, p);
    EXPECT_GE(ap, 0.0);
    EXPECT_LE(ap, 1.0);
  }
}

TEST(Metrics, SwappingARelevantItemUpwardNeverHurts) {
  Rng rng(2);
  std::size_t checked = 0;
  for (int trial = 0; trial < 10000; ++trial) {
    const std::size_t n = 2 + rng.below(12);
    std::vector<Token> ranked(n);
    for (std::size_t i = 0; i < n; ++i) ranked[i] = static_cast<Token>(i);
    rng.shuffle(ranked);
    RelevantSet relevant;
    for (std::size_t i = 0; i < n; ++i) {
      if (rng.below(2)) relevant.insert(static_cast<Token>(i));
    }
    const std::size_t lo = rng.below(n), hi = rng.below(n);
    const std::size_t up = std::min(lo, hi), down = std::max(lo, hi);
    if (relevant.empty() || !relevant.count(ranked[down]) || relevant.count(ranked[up])) continue;
    auto swapped = ranked;
    std::swap(swapped[up], swapped[down]);
    const std::size_t p = 1 + rng.below(n);
    EXPECT_GE(ndcg(swapped, relevant, p), ndcg(ranked, relevant, p) - 1e-15);
    EXPECT_GE(ap_at_k(swapped, relevant, p, ApNormalization::kMinRelevantAndK),
              ap_at_k(ranked, relevant, p, ApNormalization::kMinRelevantAndK) - 1e-15);
    // With the hits-in-top-K denominator the property holds as long as the
    // swap leaves the number of hits in the top K unchanged.
    if (down < p || up >= p) {
      EXPECT_GE(ap_at_k(swapped, relevant, p), ap_at_k(ranked, relevant, p) - 1e-15);
    }
    ++checked;
  }
  EXPECT_GT(checked, 1000u);
}

TEST(ApAtK, EnteringTheTopKCanLowerTheHitNormalizedScore) {
  // [R, N, N, R] at K = 3 has one hit with precision 1. Pulling the fourth
  // item into rank 3 adds a hit at precision 2/3.
  const std::vector<Token> before = {1, 2, 3, 4};
  const std::vector<Token> after = {1, 2, 4, 3};
  const RelevantSet relevant = {1, 4};
  EXPECT_EQ(ap_at_k(before, relevant, 3), 1.0);
  EXPECT_DOUBLE_EQ(ap_at_k(after, relevant, 3), (1.0 + 2.0 / 3.0) / 2.0);
  EXPECT_LT(ap_at_k(before, relevant, 3, ApNormalization::kMinRelevantAndK),
            ap_at_k(after, relevant, 3, ApNormalization::kMinRelevantAndK));
}

Rankings random_rankings(Rng& rng, std::size_t users, std::size_t items) {
  Rankings out;
  for (std::size_t u = 0; u < users; ++u) {
    std::vector<Token> ranked(items);
    for (std::size_t i = 0; i < items; ++i) ranked[i] = static_cast<Token>(i);
    rng.shuffle(ranked);
    out["u" + std::to_string(u)] = ranked;
  }
  return out;
}

Judgments random_judgments(Rng& rng, std::size_t users, std::size_t items, double rate) {
  Judgments out;
  for (std::size_t u = 0; u < users; ++u) {
    RelevantSet r;
    for (std::size_t i = 0; i < items; ++i) {
      if (rng.uniform() < rate) r.insert(static_cast<Token>(i));
    }
    out["u" + std::to_string(u)] = r;
  }
  return out;
}

TEST(EvaluateSystems, MapIsTheMeanOfPerUserAp) {
  Rng rng(3);
  const auto j = random_judgments(rng, 300, 20, 0.15);
  const auto r = random_rankings(rng, 300, 20);
  const auto report = evaluate_systems({{"random", r}}, j, {});
  const auto& s = report.systems.front();
  for (std::size_t k : {1, 10}) {
    double sum = 0;
    std::size_t n = 0;
    for (const auto& [user, ranked] : r) {
      if (j.at(user).empty()) continue;
      sum += testing::brute_ap(ranked, j.at(user), k);
      ++n;
    }
    EXPECT_NEAR(s.map_at_k.at(k), sum / n, 1e-12);
    EXPECT_EQ(s.evaluated_users, n);
  }
  EXPECT_EQ(s.evaluated_users + s.skipped_users, 300u);
}

TEST(EvaluateSystems, RandomRankerMatchesTheBinomialExpectation) {
  Rng rng(4);
  const std::size_t items = 20;
  const auto j = random_judgments(rng, 1000, items, 0.1);
  const auto r = random_rankings(rng, 1000, items);
  const auto report = evaluate_systems({{"random", r}}, j, {});
  // Top-1 hit for user u is Bernoulli(|rel_u| / |I|).
  double mean = 0, variance = 0;
  std::size_t n = 0;
  for (const auto& [user, rel] : j) {
    if (rel.empty()) continue;
    const double q = static_cast<double>(rel.size()) / items;
    mean += q;
    variance += q * (1 - q);
    ++n;
  }
  mean /= n;
  const double sigma = std::sqrt(variance) / n;
  EXPECT_NEAR(report.systems.front().map_at_k.at(1), mean, 3 * sigma);
}

TEST(EvaluateSystems, OracleRankingScoresOne) {
  Rng rng(5);
  const auto j = random_judgments(rng, 100, 15, 0.2);
  Rankings oracle;
  for (const auto& [user, rel] : j) {
    std::vector<Token> ranked(rel.begin(), rel.end());
    for (Token t = 0; t < 15; ++t) {
      if (!rel.count(t)) ranked.push_back(t);
    }
    oracle[user] = ranked;
  }
  const auto report = evaluate_systems({{"oracle", oracle}}, j, {});
  EXPECT_EQ(report.systems.front().ndcg, 1.0);
  EXPECT_EQ(report.systems.front().map_at_k.at(10), 1.0);
}

TEST(EvaluateSystems, IdenticalSystemsAndFairness) {
  Rng rng(6);
  const auto j = random_judgments(rng, 50, 10, 0.2);
  const auto r = random_rankings(rng, 50, 10);
  const auto report = evaluate_systems({{"a", r}, {"b", r}}, j, {});
  EXPECT_EQ(report.systems[0].map_at_k, report.systems[1].map_at_k);
  EXPECT_EQ(report.systems[0].ndcg, report.systems[1].ndcg);
  EXPECT_EQ(format_metric_report_csv(report), format_metric_report_csv(evaluate_systems({{"a", r}, {"b", r}}, j, {})));

  auto fewer = r;
  fewer.erase(fewer.begin());
  try {
    evaluate_systems({{"a", r}, {"b", fewer}}, j, {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), "unfair_comparison");
  }
}

TEST(EvaluateSystems, ZeroRelevantUsers) {
  const Judgments j = {{"a", {1}}, {"b", {}}};
  const Rankings r = {{"a", {1, 2}}, {"b", {1, 2}}};
  EvalOptions o;
  const auto skip = evaluate_systems({{"s", r}}, j, o);
  EXPECT_EQ(skip.systems[0].map_at_k.at(1), 1.0);
  EXPECT_EQ(skip.systems[0].skipped_users, 1u);
  EXPECT_EQ(skip.systems[0].map_users, 1u);
  o.zero_relevant_in_map = true;
  const auto zero = evaluate_systems({{"s", r}}, j, o);
  EXPECT_EQ(zero.systems[0].map_at_k.at(1), 0.5);
  EXPECT_EQ(zero.systems[0].ndcg, 1.0);
  EXPECT_EQ(zero.systems[0].map_users, 2u);
}

TEST(EvaluateSystems, CsvLayout) {
  const Judgments j = {{"a", {1}}, {"b", {2}}};
  const Rankings r = {{"a", {1, 2}}, {"b", {1, 2}}};
  const auto report = evaluate_systems({{"seq", r}, {"cf", r}, {"mf", r}}, j, {});
  EXPECT_EQ(format_metric_report_csv(report),
            "system,MAP@1,MAP@10,NDCG,evaluated_users,skipped_users\n"
            "seq,0.5,0.75," + format_double((1.0 + 1.0 / std::log2(3.0)) / 2.0) + ",2,0\n"
            "cf,0.5,0.75," + format_double((1.0 + 1.0 / std::log2(3.0)) / 2.0) + ",2,0\n"
            "mf,0.5,0.75," + format_double((1.0 + 1.0 / std::log2(3.0)) / 2.0) + ",2,0\n");
}

TEST(Judgments, FromTargets) {
  const RecommendableSet rec({4, 7, 9});
  TargetMap t;
  t.emplace("a", TargetVector{"a", {0, 1, 1}});
  t.emplace("b", TargetVector{"b", {0, 0, 0}});
  const std::vector<std::string> users = {"a", "b"};
  const auto j = judgments_from_targets(t, rec, users);
  EXPECT_EQ(j.at("a"), (RelevantSet{7, 9}));
  EXPECT_TRUE(j.at("b").empty());
  const std::vector<std::string> missing = {"c"};
  EXPECT_THROW(judgments_from_targets(t, rec, missing), Error);
}

}  // namespace
}  // namespace seqrec
