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

#include "seqrec/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "seqrec/error.hpp"
#include "seqrec/text.hpp"

namespace seqrec {
namespace {

double discount(std::size_t rank) { return 1.0 / std::log2(static_cast<double>(rank) + 1.0); }

}  // namespace

Judgments judgments_from_targets(const TargetMap& targets, const RecommendableSet& recommendable,
                                 std::span<const std::string> users) {
  Judgments judgments;
  for (const auto& user : users) {
    const auto it = targets.find(user);
    if (it == targets.end()) throw Error("missing_target", "no target vector for user " + user);
    RelevantSet relevant;
    for (std::size_t k = 0; k < it->second.y.size(); ++k) {
      if (it->second.y[k]) relevant.insert(recommendable.token_at(k));
    }
    judgments.emplace(user, std::move(relevant));
  }
  return judgments;
}

double dcg(std::span<const std::uint8_t> relevances, std::size_t p) {
  if (p > relevances.size()) throw Error("bad_length", "dcg list length p exceeds the list");
  double total = 0.0;
  for (std::size_t k = 1; k <= p; ++k) {
    if (relevances[k - 1]) total += discount(k);
  }
  return total;
}

double ndcg(std::span<const Token> ranked, const RelevantSet& relevant, std::size_t p) {
  if (relevant.empty()) throw Error("no_relevant_items", "ndcg is undefined without relevant items");
  const std::size_t depth = std::min(p, ranked.size());
  std::vector<std::uint8_t> realized(depth);
  for (std::size_t k = 0; k < depth; ++k) realized[k] = relevant.contains(ranked[k]) ? 1 : 0;
  const std::vector<std::uint8_t> ideal(std::min(relevant.size(), p), 1);
  return dcg(realized, depth) / dcg(ideal, ideal.size());
}

double ap_at_k(std::span<const Token> ranked, const RelevantSet& relevant, std::size_t k,
               ApNormalization normalization) {
  const std::size_t depth = std::min(k, ranked.size());
  double precision_sum = 0.0;
  std::size_t hits = 0;
  for (std::size_t rank = 1; rank <= depth; ++rank) {
    if (relevant.contains(ranked[rank - 1])) {
      ++hits;
      precision_sum += static_cast<double>(hits) / static_cast<double>(rank);
    }
  }
  if (hits == 0) return 0.0;
  const std::size_t denominator =
      normalization == ApNormalization::kRelevantInTopK ? hits : std::min(relevant.size(), k);
  return precision_sum / static_cast<double>(denominator);
}

double mean(std::span<const double> values) {
  if (values.empty()) return 0.0;
  double total = 0.0;
  for (double v : values) total += v;
  return total / static_cast<double>(values.size());
}

MetricReport evaluate_systems(const std::vector<std::pair<std::string, Rankings>>& systems,
                              const Judgments& judgments, const EvalOptions& options) {
  MetricReport report;
  report.k_values = options.k_values;
  report.ndcg_length = options.ndcg_length;
  if (systems.empty()) return report;

  const Rankings& reference = systems.front().second;
  for (const auto& [name, rankings] : systems) {
    bool same = rankings.size() == reference.size();
    for (auto a = rankings.begin(), b = reference.begin(); same && a != rankings.end(); ++a, ++b) {
      same = a->first == b->first;
    }
    if (!same) {
      throw Error("unfair_comparison", "system '" + name + "' ranked a different user set than '" +
                                           systems.front().first + "'");
    }
  }

  for (const auto& [name, rankings] : systems) {
    SystemMetrics metrics;
    metrics.system = name;
    std::map<std::size_t, std::vector<double>> ap;
    std::vector<double> ndcgs;
    for (const auto& [user, ranked] : rankings) {
      const auto it = judgments.find(user);
      if (it == judgments.end()) {
        throw Error("missing_judgment", "no relevance judgment for user " + user);
      }
      const RelevantSet& relevant = it->second;
      if (relevant.empty()) {
        ++metrics.skipped_users;
        if (options.zero_relevant_in_map) {
          for (std::size_t k : options.k_values) ap[k].push_back(0.0);
          ++metrics.map_users;
        }
        continue;
      }
      ++metrics.evaluated_users;
      ++metrics.map_users;
      for (std::size_t k : options.k_values) {
        ap[k].push_back(ap_at_k(ranked, relevant, k, options.normalization));
      }
      ndcgs.push_back(ndcg(ranked, relevant, options.ndcg_length));
    }
    for (std::size_t k : options.k_values) metrics.map_at_k[k] = mean(ap[k]);
    metrics.ndcg = mean(ndcgs);
    report.systems.push_back(std::move(metrics));
  }
  return report;
}

std::string format_metric_report_csv(const MetricReport& report) {
  std::string out = "system";
  for (std::size_t k : report.k_values) out += ",MAP@" + std::to_string(k);
  out += ",NDCG,evaluated_users,skipped_users\n";
  for (const auto& s : report.systems) {
    out += s.system;
    for (std::size_t k : report.k_values) out += "," + format_double(s.map_at_k.at(k));
    out += "," + format_double(s.ndcg) + "," + std::to_string(s.evaluated_users) + "," +
           std::to_string(s.skipped_users) + "\n";
  }
  return out;
}

}  // namespace seqrec
