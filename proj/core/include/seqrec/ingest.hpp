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
#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace seqrec {

using Token = std::int32_t;

inline constexpr Token kPadToken = 0;
inline constexpr Token kUnkToken = 1;
inline constexpr Token kFirstItemToken = 2;

// One timestamped user-item interaction.
struct Transaction {
  std::string user_id;
  std::string item_id;
  std::int64_t timestamp = 0;  // seconds since epoch, UTC

  friend bool operator==(const Transaction&, const Transaction&) = default;
};

enum class InputFormat {
  kGenericCsv,        // user_id,item_id,timestamp
  kMovielensRatings,  // userId,movieId,rating,timestamp
};

// Throws seqrec::Error("unknown_format") for anything other than
// "generic-csv" or "movielens-ratings".
InputFormat parse_input_format(std::string_view name);
std::string_view to_string(InputFormat format);

struct RejectedRow {
  std::size_t line_number = 0;  // 1-based, header is line 1
  std::string reason;
};

struct LoadResult {
  std::vector<Transaction> transactions;  // in file order
  std::vector<RejectedRow> rejects;
  std::size_t data_rows = 0;  // non-empty rows after the header
};

LoadResult parse_transactions(std::istream& in, InputFormat format);
LoadResult load_transactions(const std::filesystem::path& path, InputFormat format);

// `<line_no>\t<reason>` per rejected row.
std::string format_rejects_report(std::span<const RejectedRow> rejects);

struct WindowSplit {
  std::vector<Transaction> observation;  // timestamp < analysis_date
  std::vector<Transaction> performance;  // timestamp >= analysis_date
  std::vector<std::string> warnings;
};

WindowSplit split_by_analysis_date(std::span<const Transaction> transactions,
                                   std::int64_t analysis_date);

// Learned bijection between item identifiers and dense tokens. Tokens 0 and 1
// are reserved for PAD and UNK; items follow in descending observation
// frequency, ties broken by item id.
class ItemVocabulary {
 public:
  struct Entry {
    std::string item_id;
    std::size_t count = 0;
  };

  ItemVocabulary() = default;

  static ItemVocabulary build(std::span<const Transaction> observation, std::size_t min_count = 1);
  // Entries in token order starting at kFirstItemToken.
  static ItemVocabulary from_entries(std::vector<Entry> entries);

  // UNK for unknown items.
  Token token_of(std::string_view item_id) const;
  bool contains(std::string_view item_id) const;
  // Throws for reserved or out-of-range tokens.
  const std::string& item_of(Token token) const;
  std::size_t count_of(Token token) const;

  // |V| including the two reserved tokens.
  std::size_t size() const { return entries_.size() + kFirstItemToken; }
  std::size_t item_count() const { return entries_.size(); }
  std::span<const Entry> entries() const { return entries_; }

  // SHA-256 over the canonical token/item listing.
  const std::string& hash() const { return hash_; }

 private:
  void index();

  std::vector<Entry> entries_;
  std::unordered_map<std::string, Token> token_of_;
  std::string hash_;
};

struct UserSequence {
  std::string user_id;
  std::vector<Token> tokens;  // oldest first
};

using SequenceMap = std::map<std::string, UserSequence>;

inline constexpr std::size_t kDefaultMaxSequenceLength = 128;

// Stable timestamp ordering per user; only the most recent `max_seq_len`
// tokens are kept.
SequenceMap build_sequences(std::span<const Transaction> observation,
                            const ItemVocabulary& vocabulary,
                            std::size_t max_seq_len = kDefaultMaxSequenceLength);

// True when the history carries no known item (empty or UNK/PAD only).
bool is_cold_start(const UserSequence& sequence);

// The ordered item set I' that models score and rank. Output index k of every
// score vector refers to tokens()[k].
class RecommendableSet {
 public:
  RecommendableSet() = default;
  explicit RecommendableSet(std::vector<Token> tokens);

  static RecommendableSet all_items(const ItemVocabulary& vocabulary);

  std::span<const Token> tokens() const { return tokens_; }
  std::size_t size() const { return tokens_.size(); }
  Token token_at(std::size_t index) const { return tokens_.at(index); }
  std::optional<std::size_t> index_of(Token token) const;

 private:
  std::vector<Token> tokens_;
  std::unordered_map<Token, std::size_t> index_of_;
};

struct TargetVector {
  std::string user_id;
  std::vector<std::uint8_t> y;  // indexed like RecommendableSet
};

using TargetMap = std::map<std::string, TargetVector>;

// One vector per user in `users`; users without performance rows get zeros.
TargetMap build_targets(std::span<const Transaction> performance, const ItemVocabulary& vocabulary,
                        const RecommendableSet& recommendable,
                        std::span<const std::string> users);

struct UserSplit {
  std::vector<std::string> train;       // sorted
  std::vector<std::string> validation;  // sorted
};

// floor(train_fraction * n) users go to training, the rest to validation.
UserSplit split_users(std::vector<std::string> users, double train_fraction, std::uint64_t seed);

struct PopularityFilter {
  std::vector<Transaction> kept;
  std::vector<std::string> removed_items;  // most popular first
};

// Drops every row of the ceil(top_fraction * |I|) items with the most
// distinct users (ties by item id).
PopularityFilter drop_popular_items(std::span<const Transaction> transactions, double top_fraction);

// Users with at least one transaction, sorted.
std::vector<std::string> distinct_users(std::span<const Transaction> transactions);

}  // namespace seqrec
