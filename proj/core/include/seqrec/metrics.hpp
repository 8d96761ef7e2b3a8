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

#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "seqrec/ingest.hpp"

namespace seqrec {

// Relevant items per user: the I' items with y = 1 in the performance window.
using RelevantSet = std::set<Token>;
using Judgments = std::map<std::string, RelevantSet>;

Judgments judgments_from_targets(const TargetMap& targets, const RecommendableSet& recommendable,
                                 std::span<const std::string> users);

// sum_{k=1..p} rel_k / log2(k + 1). Requires p <= relevances.size().
double dcg(std::span<const std::uint8_t> relevances, std::size_t p);

// DCG of the first p ranked items over the ideal DCG with min(|relevant|, p)
// relevant items packed at the top. Requires a non-empty relevant set.
double ndcg(std::span<const Token> ranked, const RelevantSet& relevant, std::size_t p);

enum class ApNormalization {
  kRelevantInTopK,     // divide by the number of relevant items within the top K
  kMinRelevantAndK,    // divide by min(|relevant|, K)
};

// Mean of precision@k over the ranks k <= K holding a relevant item. Zero when
// no relevant item reaches the top K.
double ap_at_k(std::span<const Token> ranked, const RelevantSet& relevant, std::size_t k,
               ApNormalization normalization = ApNormalization::kRelevantInTopK);

double mean(std::span<const double> values);

// Ranked item tokens per user.
using Rankings = std::map<std::string, std::vector<Token>>;

struct EvalOptions {
  std::vector<std::size_t> k_values = {1, 10};
  std::size_t ndcg_length = 10;
  ApNormalization normalization = ApNormalization::kRelevantInTopK;
  // Users without relevant items enter MAP with AP = 0 instead of being skipped.
  bool zero_relevant_in_map = false;
};

struct SystemMetrics {
  std::string system;
  std::map<std::size_t, double> map_at_k;
  double ndcg = 0.0;
  std::size_t evaluated_users = 0;   // users with at least one relevant item
  std::size_t map_users = 0;         // users averaged into MAP
  std::size_t skipped_users = 0;     // users without relevant items
};

struct MetricReport {
  std::vector<SystemMetrics> systems;  // in the order given
  std::vector<std::size_t> k_values;
  std::size_t ndcg_length = 10;
};

// Every system must rank exactly the same users (seqrec::Error
// "unfair_comparison" otherwise); `judgments` must cover those users.
MetricReport evaluate_systems(const std::vector<std::pair<std::string, Rankings>>& systems,
                              const Judgments& judgments, const EvalOptions& options);

// system,MAP@1,MAP@10,NDCG,evaluated_users,skipped_users
std::string format_metric_report_csv(const MetricReport& report);

}  // namespace seqrec
