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

#include "seqrec/baselines.hpp"
#include "seqrec/error.hpp"

namespace seqrec {

NGramTable::NGramTable(std::size_t order, double alpha, std::size_t vocab_size, bool backoff)
    : order_(order), alpha_(alpha), vocab_size_(vocab_size), backoff_(backoff) {
  if (order_ < 2) throw Error("bad_config", "n-gram order must be at least 2");
  if (!(alpha_ >= 0.0)) throw Error("bad_config", "n-gram alpha must be non-negative");
  if (vocab_size_ == 0) throw Error("bad_config", "n-gram vocabulary is empty");
}

void NGramTable::add_sequence(std::span<const Token> tokens) {
  for (std::size_t t = 0; t < tokens.size(); ++t) {
    const Token next = tokens[t];
    if (next < 0 || static_cast<std::size_t>(next) >= vocab_size_) {
      throw Error("token_out_of_range", "token " + std::to_string(next) + " outside vocabulary");
    }
    const std::size_t longest = std::min(order_ - 1, t);
    for (std::size_t length = 0; length <= longest; ++length) {
      std::vector<Token> context(tokens.begin() + static_cast<std::ptrdiff_t>(t - length),
                                 tokens.begin() + static_cast<std::ptrdiff_t>(t));
      Counts& counts = counts_[std::move(context)];
      ++counts.next[next];
      ++counts.total;
    }
  }
}

std::size_t NGramTable::count(std::span<const Token> context, Token next) const {
  const auto it = counts_.find(std::vector<Token>(context.begin(), context.end()));
  if (it == counts_.end()) return 0;
  const auto n = it->second.next.find(next);
  return n == it->second.next.end() ? 0 : n->second;
}

std::size_t NGramTable::total(std::span<const Token> context) const {
  const auto it = counts_.find(std::vector<Token>(context.begin(), context.end()));
  return it == counts_.end() ? 0 : it->second.total;
}

std::vector<double> NGramTable::predict(std::span<const Token> context) const {
  if (context.size() > order_ - 1) context = context.last(order_ - 1);
  const Counts* counts = nullptr;
  while (true) {
    const auto it = counts_.find(std::vector<Token>(context.begin(), context.end()));
    if (it != counts_.end() && it->second.total > 0) {
      counts = &it->second;
      break;
    }
    if (!backoff_ || context.empty()) break;
    context = context.last(context.size() - 1);
  }

  const double total = counts ? static_cast<double>(counts->total) : 0.0;
  const double denominator = total + alpha_ * static_cast<double>(vocab_size_);
  if (denominator <= 0.0) {
    return std::vector<double>(vocab_size_, 1.0 / static_cast<double>(vocab_size_));
  }
  std::vector<double> p(vocab_size_, alpha_ / denominator);
  if (counts != nullptr) {
    for (const auto& [token, c] : counts->next) {
      p[static_cast<std::size_t>(token)] = (static_cast<double>(c) + alpha_) / denominator;
    }
  }
  return p;
}

nn::Checkpoint NGramTable::to_checkpoint(std::string vocabulary_hash) const {
  std::size_t rows = 0;
  for (const auto& [context, counts] : counts_) rows += counts.next.size();
  // Row layout: context length, context tokens padded with -1, next, count.
  nn::Matrix table(rows, order_ + 2);
  std::size_t r = 0;
  for (const auto& [context, counts] : counts_) {
    for (const auto& [next, c] : counts.next) {
      table(r, 0) = static_cast<double>(context.size());
      for (std::size_t k = 0; k + 1 < order_; ++k) {
        table(r, 1 + k) = k < context.size() ? static_cast<double>(context[k]) : -1.0;
      }
      table(r, order_) = static_cast<double>(next);
      table(r, order_ + 1) = static_cast<double>(c);
      ++r;
    }
  }
  nn::Checkpoint checkpoint;
  checkpoint.kind = "ngram";
  checkpoint.vocabulary_hash = std::move(vocabulary_hash);
  checkpoint.meta = {{"order", order_},
                     {"alpha", alpha_},
                     {"vocab_size", vocab_size_},
                     {"backoff", backoff_}};
  checkpoint.tensors.emplace_back("counts", std::move(table));
  return checkpoint;
}

NGramTable NGramTable::from_checkpoint(const nn::Checkpoint& checkpoint) {
  NGramTable table(checkpoint.meta.at("order").get<std::size_t>(),
                   checkpoint.meta.at("alpha").get<double>(),
                   checkpoint.meta.at("vocab_size").get<std::size_t>(),
                   checkpoint.meta.at("backoff").get<bool>());
  const nn::Matrix& rows = checkpoint.tensor("counts");
  if (rows.rows() > 0 && rows.cols() != table.order_ + 2) {
    throw Error("bad_checkpoint", "n-gram count table has the wrong width");
  }
  for (std::size_t r = 0; r < rows.rows(); ++r) {
    const auto length = static_cast<std::size_t>(rows(r, 0));
    std::vector<Token> context;
    for (std::size_t k = 0; k < length; ++k) context.push_back(static_cast<Token>(rows(r, 1 + k)));
    const auto next = static_cast<Token>(rows(r, table.order_));
    const auto c = static_cast<std::size_t>(rows(r, table.order_ + 1));
    Counts& counts = table.counts_[std::move(context)];
    counts.next[next] += c;
    counts.total += c;
  }
  return table;
}

NGramTable ngram_train(const SequenceMap& sequences, std::span<const std::string> users,
                       std::size_t order, double alpha, std::size_t vocab_size, bool backoff) {
  NGramTable table(order, alpha, vocab_size, backoff);
  for (const auto& user : users) {
    const auto it = sequences.find(user);
    if (it == sequences.end()) throw Error("missing_sequence", "no sequence for user " + user);
    table.add_sequence(it->second.tokens);
  }
  return table;
}

std::vector<double> ngram_predict(const NGramTable& table, std::span<const Token> history) {
  return table.predict(history);
}

}  // namespace seqrec
