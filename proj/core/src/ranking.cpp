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

#include "seqrec/ranking.hpp"

#include <algorithm>
#include <numeric>
#include <unordered_set>

#include "seqrec/error.hpp"
#include "seqrec/text.hpp"

namespace seqrec {
namespace {

bool mask_allows(const std::vector<bool>& mask, std::size_t index) {
  return mask.empty() || mask.at(index);
}

bool mask_marks(const std::vector<bool>& mask, std::size_t index) {
  return !mask.empty() && mask.at(index);
}

void check_masks(const RankingRules& rules, std::size_t n) {
  if (!rules.allowed.empty() && rules.allowed.size() != n) {
    throw Error("shape_mismatch", "allowed-items mask does not match |I'|");
  }
  if (!rules.priority.empty() && rules.priority.size() != n) {
    throw Error("shape_mismatch", "priority mask does not match |I'|");
  }
}

// Candidate indices after filtering, sorted by (priority, key desc, index).
std::vector<std::size_t> rank_indices(std::span<const double> key, std::size_t k,
                                      const RecommendableSet& recommendable,
                                      const RankingRules& rules, std::span<const Token> history) {
  if (k == 0) throw Error("bad_k", "K must be at least 1");
  const std::size_t n = recommendable.size();
  check_masks(rules, n);
  std::unordered_set<Token> seen;
  if (rules.exclude_history) seen.insert(history.begin(), history.end());

  std::vector<std::size_t> candidates;
  bool any_allowed = false;
  for (std::size_t i = 0; i < n; ++i) {
    if (!mask_allows(rules.allowed, i)) continue;
    any_allowed = true;
    if (seen.contains(recommendable.token_at(i))) continue;
    candidates.push_back(i);
  }
  if (!any_allowed) throw Error("empty_allowed_set", "no recommendable item is allowed");

  const auto before = [&](std::size_t a, std::size_t b) {
    const bool pa = mask_marks(rules.priority, a);
    const bool pb = mask_marks(rules.priority, b);
    if (pa != pb) return pa;
    if (key[a] != key[b]) return key[a] > key[b];
    return a < b;
  };
  const std::size_t take = std::min(k, candidates.size());
  std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(take),
                    candidates.end(), before);
  candidates.resize(take);
  return candidates;
}

}  // namespace

BasePopularity::BasePopularity(std::vector<double> probabilities)
    : probabilities_(std::move(probabilities)) {
  for (double& p : probabilities_) {
    if (!(p >= 0.0 && p <= 1.0)) throw Error("bad_probability", "base popularity outside [0, 1]");
    p = std::max(p, kPopularityFloor);
  }
}

BasePopularity BasePopularity::estimate(const TargetMap& targets,
                                        std::span<const std::string> users) {
  if (users.empty()) throw Error("no_training_users", "base popularity needs training users");
  std::vector<std::size_t> counts;
  for (const auto& user : users) {
    const auto it = targets.find(user);
    if (it == targets.end()) throw Error("missing_target", "no target vector for user " + user);
    const auto& y = it->second.y;
    if (counts.empty()) counts.assign(y.size(), 0);
    if (y.size() != counts.size()) throw Error("shape_mismatch", "ragged target vectors");
    for (std::size_t k = 0; k < y.size(); ++k) counts[k] += y[k];
  }
  std::vector<double> p(counts.size());
  for (std::size_t k = 0; k < counts.size(); ++k) {
    p[k] = static_cast<double>(counts[k]) / static_cast<double>(users.size());
  }
  return BasePopularity(std::move(p));
}

std::vector<std::size_t> BasePopularity::order() const {
  std::vector<std::size_t> idx(probabilities_.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return probabilities_[a] > probabilities_[b];
  });
  return idx;
}

std::vector<double> uplift(std::span<const double> probabilities, const BasePopularity& base) {
  if (probabilities.size() != base.size()) {
    throw Error("shape_mismatch", "probability vector does not match base popularity");
  }
  std::vector<double> r(probabilities.size());
  for (std::size_t k = 0; k < r.size(); ++k) r[k] = probabilities[k] / base[k];
  return r;
}

Recommendation top_k(std::string user_id, std::span<const double> scores,
                     std::span<const double> probabilities, std::size_t k,
                     const RecommendableSet& recommendable, const RankingRules& rules,
                     std::span<const Token> history) {
  if (scores.size() != recommendable.size() ||
      (!probabilities.empty() && probabilities.size() != scores.size())) {
    throw Error("shape_mismatch", "score vector does not match |I'|");
  }
  Recommendation rec{std::move(user_id), {}, false};
  for (std::size_t index : rank_indices(scores, k, recommendable, rules, history)) {
    rec.items.push_back({index, recommendable.token_at(index), scores[index],
                         probabilities.empty() ? scores[index] : probabilities[index]});
  }
  return rec;
}

Recommendation popularity_fallback(std::string user_id, const BasePopularity& base, std::size_t k,
                                   const RecommendableSet& recommendable,
                                   const RankingRules& rules) {
  if (base.size() != recommendable.size()) {
    throw Error("shape_mismatch", "base popularity does not match |I'|");
  }
  Recommendation rec{std::move(user_id), {}, true};
  for (std::size_t index : rank_indices(base.values(), k, recommendable, rules, {})) {
    rec.items.push_back({index, recommendable.token_at(index), 1.0, base[index]});
  }
  return rec;
}

std::string format_recommendations_csv(std::span<const Recommendation> recommendations,
                                       const ItemVocabulary& vocabulary) {
  std::string out = "user_id,rank,item_id,uplift,probability,fallback\n";
  for (const auto& rec : recommendations) {
    for (std::size_t r = 0; r < rec.items.size(); ++r) {
      const auto& item = rec.items[r];
      out += rec.user_id + "," + std::to_string(r + 1) + "," + vocabulary.item_of(item.token) +
             "," + format_double(item.uplift) + "," + format_double(item.probability) + "," +
             (rec.fallback ? "1" : "0") + "\n";
    }
  }
  return out;
}

}  // namespace seqrec
