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
#include <span>
#include <string>
#include <vector>

#include "seqrec/ingest.hpp"

namespace seqrec {

inline constexpr double kPopularityFloor = 1e-6;

// Probability that a random training user interacts with each item of I'
// during the performance window, floored at kPopularityFloor.
class BasePopularity {
 public:
  BasePopularity() = default;
  explicit BasePopularity(std::vector<double> probabilities);

  // Throws seqrec::Error("no_training_users") for an empty user list.
  static BasePopularity estimate(const TargetMap& targets, std::span<const std::string> users);

  std::span<const double> values() const { return probabilities_; }
  double operator[](std::size_t index) const { return probabilities_.at(index); }
  std::size_t size() const { return probabilities_.size(); }

  // Indices of I' by descending popularity, ties by index.
  std::vector<std::size_t> order() const;

 private:
  std::vector<double> probabilities_;
};

// R = P_u / P elementwise.
std::vector<double> uplift(std::span<const double> probabilities, const BasePopularity& base);

struct RankedItem {
  std::size_t index = 0;  // position in I'
  Token token = 0;
  double uplift = 0.0;
  double probability = 0.0;
};

struct Recommendation {
  std::string user_id;
  std::vector<RankedItem> items;
  bool fallback = false;
};

// Business rules applied after scoring; masks are indexed like I'. An empty
// mask means "all items".
struct RankingRules {
  std::vector<bool> allowed;
  // Allowed priority items are listed ahead of all other allowed items.
  std::vector<bool> priority;
  // Drop items the user already has in their history.
  bool exclude_history = false;
};

// Sorted by score descending, ties by I' index (equivalently token order).
// Throws seqrec::Error("empty_allowed_set") when no item is allowed, and
// seqrec::Error("bad_k") when k == 0.
Recommendation top_k(std::string user_id, std::span<const double> scores,
                     std::span<const double> probabilities, std::size_t k,
                     const RecommendableSet& recommendable, const RankingRules& rules = {},
                     std::span<const Token> history = {});

// Popularity-ordered default list with the fallback flag set.
Recommendation popularity_fallback(std::string user_id, const BasePopularity& base, std::size_t k,
                                   const RecommendableSet& recommendable,
                                   const RankingRules& rules = {});

// Header `user_id,rank,item_id,uplift,probability,fallback`, rank from 1.
std::string format_recommendations_csv(std::span<const Recommendation> recommendations,
                                       const ItemVocabulary& vocabulary);

}  // namespace seqrec
