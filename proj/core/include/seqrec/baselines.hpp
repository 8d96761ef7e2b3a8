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
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "seqrec/ingest.hpp"
#include "seqrec/nn/checkpoint.hpp"
#include "seqrec/nn/matrix.hpp"

namespace seqrec {

// Implicit "rating" of a user for an item: the interaction count, or a 0/1
// indicator in binary mode.
enum class InteractionMode { kCount, kBinary };

InteractionMode parse_interaction_mode(std::string_view name);
std::string_view to_string(InteractionMode mode);

// Sorted (token, value) pairs with value > 0; reserved tokens are skipped.
using InteractionRow = std::vector<std::pair<Token, double>>;

InteractionRow interaction_row(std::span<const Token> tokens, InteractionMode mode);

// Sparse user x item matrix over vocabulary tokens.
class InteractionMatrix {
 public:
  explicit InteractionMatrix(std::size_t vocab_size) : columns_(vocab_size) {}

  static InteractionMatrix from_sequences(const SequenceMap& sequences,
                                          std::span<const std::string> users,
                                          std::size_t vocab_size, InteractionMode mode);

  // Returns the new user's row index.
  std::size_t add_user(std::string user_id, InteractionRow row);

  std::size_t user_count() const { return rows_.size(); }
  std::size_t vocab_size() const { return columns_.size(); }
  std::size_t nonzeros() const { return nonzeros_; }

  std::optional<std::size_t> user_index(std::string_view user_id) const;
  const std::string& user_id(std::size_t user) const { return user_ids_.at(user); }
  const InteractionRow& row(std::size_t user) const { return rows_.at(user); }
  // (user index, value) pairs in user order.
  const std::vector<std::pair<std::size_t, double>>& column(Token item) const;
  double value(std::size_t user, Token item) const;

 private:
  std::vector<std::string> user_ids_;
  std::unordered_map<std::string, std::size_t> index_of_;
  std::vector<InteractionRow> rows_;
  std::vector<std::vector<std::pair<std::size_t, double>>> columns_;
  std::size_t nonzeros_ = 0;
};

// A prediction plus whether any evidence supported it.
struct Estimate {
  double value = 0.0;
  bool has_evidence = false;
};

// --- Item-item collaborative filtering -----------------------------------------

// Cosine of two item columns; 0 when either column is empty.
double item_similarity(const InteractionMatrix& matrix, Token i, Token j);

struct Neighbor {
  Token item = 0;
  double similarity = 0.0;
};

inline constexpr std::size_t kDefaultNeighborhood = 50;

// The `neighborhood` items most similar to each item, restricted to positive
// similarity, most similar first (ties by token).
class ItemKnn {
 public:
  static ItemKnn fit(const InteractionMatrix& matrix, std::size_t neighborhood,
                     InteractionMode mode);
  static ItemKnn from_checkpoint(const nn::Checkpoint& checkpoint);
  nn::Checkpoint to_checkpoint(std::string vocabulary_hash) const;

  // sum_j r(u,j) w(i,j) / sum_j w(i,j) over the neighborhood of `item`, where
  // r(u,j) is read from `row` (0 when absent). No evidence when the
  // neighborhood is empty.
  Estimate predict(const InteractionRow& row, Token item) const;

  std::span<const Neighbor> neighbors(Token item) const { return neighbors_.at(item); }
  std::size_t neighborhood() const { return neighborhood_; }
  InteractionMode mode() const { return mode_; }
  std::size_t vocab_size() const { return neighbors_.size(); }

 private:
  std::vector<std::vector<Neighbor>> neighbors_;
  std::size_t neighborhood_ = kDefaultNeighborhood;
  InteractionMode mode_ = InteractionMode::kCount;
};

// Direct evaluation against a row of the matrix, without a fitted model.
Estimate cf_predict(const InteractionMatrix& matrix, std::size_t user, Token item,
                    std::size_t neighborhood);

// --- Matrix factorization ------------------------------------------------------

struct MfConfig {
  std::size_t k = 16;
  double learning_rate = 0.01;
  double regularization = 0.05;
  std::size_t epochs = 30;
  double init_scale = 0.1;
  std::uint64_t seed = 0;
};

struct LatentFactors {
  nn::Matrix item_factors;  // |V| x k
  nn::Matrix user_factors;  // |U| x k, rows follow `users`
  std::vector<std::string> users;
  std::vector<std::uint8_t> item_seen;  // item had at least one training entry
  double regularization = 0.0;

  std::size_t k() const { return item_factors.cols(); }
  std::optional<std::size_t> user_index(std::string_view user_id) const;
};

struct MfTrainResult {
  LatentFactors factors;
  std::vector<double> epoch_mse;  // observed-entry MSE after each epoch
};

// SGD over the observed entries of the MSE + lambda(|p_u|^2 + |q_i|^2)
// objective. Throws seqrec::Error("diverged") once the MSE exceeds 1e6.
MfTrainResult mf_train(const InteractionMatrix& matrix, const MfConfig& config);

// q_i . p_u; no evidence for unknown users or items without training entries.
Estimate mf_predict(const LatentFactors& factors, std::size_t user, Token item);

// Ridge solution for a user outside training with the item factors held
// fixed: argmin_p sum_{i in row} (r_i - q_i.p)^2 + lambda |row| |p|^2.
std::optional<std::vector<double>> fold_in_user(const LatentFactors& factors,
                                                const InteractionRow& row);

nn::Checkpoint mf_to_checkpoint(const MfTrainResult& result, const MfConfig& config,
                                std::string vocabulary_hash);
LatentFactors mf_from_checkpoint(const nn::Checkpoint& checkpoint);

// --- N-gram next-token model -----------------------------------------------------

// Counts of next tokens for every context of length 0..n-1. Probabilities are
// additive-smoothed over the whole vocabulary:
//   P(i | ctx) = (count(ctx, i) + alpha) / (total(ctx) + alpha |V|).
// With backoff on, an unseen context is shortened from the oldest side until
// it has been observed; otherwise an unseen context yields the smoothing
// floor (uniform when alpha > 0).
class NGramTable {
 public:
  NGramTable(std::size_t order, double alpha, std::size_t vocab_size, bool backoff = true);

  void add_sequence(std::span<const Token> tokens);

  std::vector<double> predict(std::span<const Token> context) const;
  std::size_t count(std::span<const Token> context, Token next) const;
  std::size_t total(std::span<const Token> context) const;

  std::size_t order() const { return order_; }
  double alpha() const { return alpha_; }
  std::size_t vocab_size() const { return vocab_size_; }
  bool backoff() const { return backoff_; }
  std::size_t context_count() const { return counts_.size(); }

  nn::Checkpoint to_checkpoint(std::string vocabulary_hash) const;
  static NGramTable from_checkpoint(const nn::Checkpoint& checkpoint);

 private:
  struct Counts {
    std::map<Token, std::size_t> next;
    std::size_t total = 0;
  };

  std::size_t order_;
  double alpha_;
  std::size_t vocab_size_;
  bool backoff_;
  std::map<std::vector<Token>, Counts> counts_;
};

NGramTable ngram_train(const SequenceMap& sequences, std::span<const std::string> users,
                       std::size_t order, double alpha, std::size_t vocab_size,
                       bool backoff = true);

// Probability vector over all |V| tokens given the trailing tokens of
// `history`.
std::vector<double> ngram_predict(const NGramTable& table, std::span<const Token> history);

// --- Uniform scoring adapter --------------------------------------------------

enum class BaselineMethod { kCf, kMf, kNgram };

BaselineMethod parse_baseline_method(std::string_view name);
std::string_view to_string(BaselineMethod method);

// Score assigned to items for which a method has no evidence.
inline constexpr double kCfNoEvidenceScore = 0.0;
inline constexpr double kMfNoEvidenceScore = -1e9;

struct BaselineModels {
  std::optional<ItemKnn> cf;
  std::optional<LatentFactors> mf;
  std::optional<NGramTable> ngram;
  InteractionMode mode = InteractionMode::kCount;
};

// Per-item scores over I' for one user, higher is better. Throws
// seqrec::Error("untrained_method") when the method was not fitted.
std::vector<double> baseline_scores(BaselineMethod method, const BaselineModels& models,
                                    const UserSequence& user,
                                    const RecommendableSet& recommendable);

}  // namespace seqrec
