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
#include <map>

#include "seqrec/baselines.hpp"
#include "seqrec/error.hpp"

namespace seqrec {

InteractionMode parse_interaction_mode(std::string_view name) {
  if (name == "count") return InteractionMode::kCount;
  if (name == "binary") return InteractionMode::kBinary;
  throw Error("bad_config", "interaction mode must be 'count' or 'binary', got '" +
                                std::string(name) + "'");
}

std::string_view to_string(InteractionMode mode) {
  return mode == InteractionMode::kCount ? "count" : "binary";
}

InteractionRow interaction_row(std::span<const Token> tokens, InteractionMode mode) {
  std::map<Token, double> counts;
  for (Token t : tokens) {
    if (t >= kFirstItemToken) counts[t] += 1.0;
  }
  InteractionRow row;
  row.reserve(counts.size());
  for (const auto& [token, count] : counts) {
    row.emplace_back(token, mode == InteractionMode::kBinary ? 1.0 : count);
  }
  return row;
}

InteractionMatrix InteractionMatrix::from_sequences(const SequenceMap& sequences,
                                                    std::span<const std::string> users,
                                                    std::size_t vocab_size,
                                                    InteractionMode mode) {
  InteractionMatrix matrix(vocab_size);
  for (const auto& user : users) {
    const auto it = sequences.find(user);
    if (it == sequences.end()) throw Error("missing_sequence", "no sequence for user " + user);
    matrix.add_user(user, interaction_row(it->second.tokens, mode));
  }
  return matrix;
}

std::size_t InteractionMatrix::add_user(std::string user_id, InteractionRow row) {
  std::sort(row.begin(), row.end());
  const std::size_t index = rows_.size();
  if (!index_of_.emplace(user_id, index).second) {
    throw Error("duplicate_user", "user " + user_id + " already in interaction matrix");
  }
  for (std::size_t k = 0; k < row.size(); ++k) {
    const auto [token, value] = row[k];
    if (token < 0 || static_cast<std::size_t>(token) >= columns_.size()) {
      throw Error("token_out_of_range", "token " + std::to_string(token) + " outside vocabulary");
    }
    if (!(value >= 0.0)) throw Error("bad_interaction", "interaction values must be >= 0");
    if (k > 0 && row[k - 1].first == token) {
      throw Error("bad_interaction", "duplicate token in interaction row");
    }
    columns_[static_cast<std::size_t>(token)].emplace_back(index, value);
  }
  nonzeros_ += row.size();
  user_ids_.push_back(std::move(user_id));
  rows_.push_back(std::move(row));
  return index;
}

std::optional<std::size_t> InteractionMatrix::user_index(std::string_view user_id) const {
  const auto it = index_of_.find(std::string(user_id));
  if (it == index_of_.end()) return std::nullopt;
  return it->second;
}

const std::vector<std::pair<std::size_t, double>>& InteractionMatrix::column(Token item) const {
  return columns_.at(static_cast<std::size_t>(item));
}

double InteractionMatrix::value(std::size_t user, Token item) const {
  const auto& r = rows_.at(user);
  const auto it = std::lower_bound(r.begin(), r.end(), std::make_pair(item, 0.0),
                                   [](const auto& a, const auto& b) { return a.first < b.first; });
  return it != r.end() && it->first == item ? it->second : 0.0;
}

BaselineMethod parse_baseline_method(std::string_view name) {
  if (name == "cf") return BaselineMethod::kCf;
  if (name == "mf") return BaselineMethod::kMf;
  if (name == "ngram") return BaselineMethod::kNgram;
  throw Error("unknown_method", "unknown baseline method '" + std::string(name) + "'");
}

std::string_view to_string(BaselineMethod method) {
  switch (method) {
    case BaselineMethod::kCf:
      return "cf";
    case BaselineMethod::kMf:
      return "mf";
    case BaselineMethod::kNgram:
      return "ngram";
  }
  return {};
}

std::vector<double> baseline_scores(BaselineMethod method, const BaselineModels& models,
                                    const UserSequence& user,
                                    const RecommendableSet& recommendable) {
  std::vector<double> scores(recommendable.size());
  switch (method) {
    case BaselineMethod::kCf: {
      if (!models.cf) throw Error("untrained_method", "cf baseline has not been trained");
      const InteractionRow row = interaction_row(user.tokens, models.cf->mode());
      for (std::size_t k = 0; k < scores.size(); ++k) {
        const Estimate e = models.cf->predict(row, recommendable.token_at(k));
        scores[k] = e.has_evidence ? e.value : kCfNoEvidenceScore;
      }
      break;
    }
    case BaselineMethod::kMf: {
      if (!models.mf) throw Error("untrained_method", "mf baseline has not been trained");
      const LatentFactors& f = *models.mf;
      std::optional<std::vector<double>> user_vector;
      if (const auto index = f.user_index(user.user_id)) {
        const auto r = f.user_factors.row(*index);
        user_vector.emplace(r.begin(), r.end());
      } else {
        user_vector = fold_in_user(f, interaction_row(user.tokens, models.mode));
      }
      for (std::size_t k = 0; k < scores.size(); ++k) {
        const auto token = static_cast<std::size_t>(recommendable.token_at(k));
        if (!user_vector || !f.item_seen.at(token)) {
          scores[k] = kMfNoEvidenceScore;
        } else {
          scores[k] = nn::dot(f.item_factors.row(token), *user_vector);
        }
      }
      break;
    }
    case BaselineMethod::kNgram: {
      if (!models.ngram) throw Error("untrained_method", "ngram baseline has not been trained");
      const std::vector<double> p = ngram_predict(*models.ngram, user.tokens);
      for (std::size_t k = 0; k < scores.size(); ++k) {
        scores[k] = p.at(static_cast<std::size_t>(recommendable.token_at(k)));
      }
      break;
    }
  }
  return scores;
}

}  // namespace seqrec
