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

#include "seqrec/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <unordered_set>

#include "seqrec/error.hpp"
#include "seqrec/hash.hpp"
#include "seqrec/random.hpp"
#include "seqrec/text.hpp"

namespace seqrec {
namespace {

// Guards floor/ceil of fraction * count against representation error
// (0.1 * 30 is 3.0000000000000004).
constexpr double kFractionSlack = 1e-9;

std::string_view expected_header(InputFormat format) {
  switch (format) {
    case InputFormat::kGenericCsv:
      return "user_id,item_id,timestamp";
    case InputFormat::kMovielensRatings:
      return "userId,movieId,rating,timestamp";
  }
  return {};
}

std::size_t expected_fields(InputFormat format) {
  return format == InputFormat::kGenericCsv ? 3 : 4;
}

std::string_view strip_bom(std::string_view line) {
  constexpr std::string_view kBom = "\xEF\xBB\xBF";
  if (line.substr(0, kBom.size()) == kBom) line.remove_prefix(kBom.size());
  return line;
}

// Returns an empty reason when the row is valid.
std::string parse_row(std::string_view line, InputFormat format, Transaction& out) {
  const auto fields = split(line, ',');
  if (fields.size() != expected_fields(format)) {
    return "expected " + std::to_string(expected_fields(format)) + " fields, found " +
           std::to_string(fields.size());
  }
  const std::string_view user = trim(fields[0]);
  const std::string_view item = trim(fields[1]);
  const std::string_view stamp = trim(fields.back());
  if (user.empty()) return "empty user id";
  if (item.empty()) return "empty item id";
  if (format == InputFormat::kMovielensRatings && !parse_double(trim(fields[2]))) {
    return "non-numeric rating";
  }
  const auto timestamp = parse_int64(stamp);
  if (!timestamp) return "non-integer timestamp";
  if (*timestamp < 0) return "negative timestamp";
  out.user_id.assign(user);
  out.item_id.assign(item);
  out.timestamp = *timestamp;
  return {};
}

}  // namespace

InputFormat parse_input_format(std::string_view name) {
  if (name == "generic-csv") return InputFormat::kGenericCsv;
  if (name == "movielens-ratings") return InputFormat::kMovielensRatings;
  throw Error("unknown_format", "unknown input format '" + std::string(name) +
                                    "' (expected generic-csv or movielens-ratings)");
}

std::string_view to_string(InputFormat format) {
  return format == InputFormat::kGenericCsv ? "generic-csv" : "movielens-ratings";
}

LoadResult parse_transactions(std::istream& in, InputFormat format) {
  LoadResult result;
  std::string line;
  if (!std::getline(in, line)) {
    throw Error("bad_header", "input is empty; expected header '" +
                                  std::string(expected_header(format)) + "'");
  }
  const std::string_view header = trim(strip_bom(line));
  if (header != expected_header(format)) {
    throw Error("bad_header", "header '" + std::string(header) + "' does not match " +
                                  std::string(to_string(format)) + " layout '" +
                                  std::string(expected_header(format)) + "'");
  }
  std::size_t line_number = 1;
  while (std::getline(in, line)) {
    ++line_number;
    const std::string_view row = trim(line);
    if (row.empty()) continue;
    ++result.data_rows;
    Transaction transaction;
    std::string reason = parse_row(row, format, transaction);
    if (reason.empty()) {
      result.transactions.push_back(std::move(transaction));
    } else {
      result.rejects.push_back({line_number, std::move(reason)});
    }
  }
  return result;
}

LoadResult load_transactions(const std::filesystem::path& path, InputFormat format) {
  std::ifstream in(path);
  if (!in) throw Error("missing_input", "cannot open transaction file " + path.string());
  try {
    return parse_transactions(in, format);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

std::string format_rejects_report(std::span<const RejectedRow> rejects) {
  std::string report;
  for (const auto& reject : rejects) {
    report += std::to_string(reject.line_number);
    report += '\t';
    report += reject.reason;
    report += '\n';
  }
  return report;
}

WindowSplit split_by_analysis_date(std::span<const Transaction> transactions,
                                   std::int64_t analysis_date) {
  WindowSplit split;
  for (const auto& t : transactions) {
    (t.timestamp < analysis_date ? split.observation : split.performance).push_back(t);
  }
  if (split.observation.empty()) {
    split.warnings.push_back("observation window is empty: analysis date " +
                             std::to_string(analysis_date) + " precedes every transaction");
  }
  if (split.performance.empty()) {
    split.warnings.push_back("performance window is empty: analysis date " +
                             std::to_string(analysis_date) + " follows every transaction");
  }
  return split;
}

// ItemVocabulary ------------------------------------------------------------

ItemVocabulary ItemVocabulary::build(std::span<const Transaction> observation,
                                     std::size_t min_count) {
  std::unordered_map<std::string, std::size_t> counts;
  for (const auto& t : observation) ++counts[t.item_id];
  std::vector<Entry> entries;
  entries.reserve(counts.size());
  for (auto& [item, count] : counts) {
    if (count >= min_count) entries.push_back({item, count});
  }
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    if (a.count != b.count) return a.count > b.count;
    return a.item_id < b.item_id;
  });
  return from_entries(std::move(entries));
}

ItemVocabulary ItemVocabulary::from_entries(std::vector<Entry> entries) {
  ItemVocabulary vocabulary;
  vocabulary.entries_ = std::move(entries);
  vocabulary.index();
  return vocabulary;
}

void ItemVocabulary::index() {
  token_of_.clear();
  token_of_.reserve(entries_.size());
  std::string canonical;
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const Token token = static_cast<Token>(i) + kFirstItemToken;
    if (entries_[i].item_id.empty()) throw Error("bad_vocabulary", "empty item id in vocabulary");
    if (!token_of_.emplace(entries_[i].item_id, token).second) {
      throw Error("bad_vocabulary", "duplicate item id '" + entries_[i].item_id + "'");
    }
    canonical += std::to_string(token);
    canonical += '\t';
    canonical += entries_[i].item_id;
    canonical += '\n';
  }
  hash_ = sha256_hex(canonical);
}

Token ItemVocabulary::token_of(std::string_view item_id) const {
  const auto it = token_of_.find(std::string(item_id));
  return it == token_of_.end() ? kUnkToken : it->second;
}

bool ItemVocabulary::contains(std::string_view item_id) const {
  return token_of_.contains(std::string(item_id));
}

const std::string& ItemVocabulary::item_of(Token token) const {
  if (token < kFirstItemToken || static_cast<std::size_t>(token) >= size()) {
    throw Error("bad_token", "token " + std::to_string(token) + " has no item");
  }
  return entries_[static_cast<std::size_t>(token - kFirstItemToken)].item_id;
}

std::size_t ItemVocabulary::count_of(Token token) const {
  if (token < kFirstItemToken || static_cast<std::size_t>(token) >= size()) return 0;
  return entries_[static_cast<std::size_t>(token - kFirstItemToken)].count;
}

// Sequences and targets -----------------------------------------------------

SequenceMap build_sequences(std::span<const Transaction> observation,
                            const ItemVocabulary& vocabulary, std::size_t max_seq_len) {
  std::map<std::string, std::vector<const Transaction*>> by_user;
  for (const auto& t : observation) by_user[t.user_id].push_back(&t);

  SequenceMap sequences;
  for (auto& [user, rows] : by_user) {
    std::stable_sort(rows.begin(), rows.end(), [](const Transaction* a, const Transaction* b) {
      return a->timestamp < b->timestamp;
    });
    const std::size_t skip = rows.size() > max_seq_len ? rows.size() - max_seq_len : 0;
    UserSequence sequence{user, {}};
    sequence.tokens.reserve(rows.size() - skip);
    for (std::size_t i = skip; i < rows.size(); ++i) {
      sequence.tokens.push_back(vocabulary.token_of(rows[i]->item_id));
    }
    sequences.emplace(user, std::move(sequence));
  }
  return sequences;
}

bool is_cold_start(const UserSequence& sequence) {
  return std::all_of(sequence.tokens.begin(), sequence.tokens.end(),
                     [](Token t) { return t < kFirstItemToken; });
}

RecommendableSet::RecommendableSet(std::vector<Token> tokens) : tokens_(std::move(tokens)) {
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    if (tokens_[i] < kFirstItemToken) {
      throw Error("bad_recommendable", "reserved token in recommendable set");
    }
    if (!index_of_.emplace(tokens_[i], i).second) {
      throw Error("bad_recommendable", "duplicate token " + std::to_string(tokens_[i]) +
                                           " in recommendable set");
    }
  }
}

RecommendableSet RecommendableSet::all_items(const ItemVocabulary& vocabulary) {
  std::vector<Token> tokens(vocabulary.item_count());
  std::iota(tokens.begin(), tokens.end(), kFirstItemToken);
  return RecommendableSet(std::move(tokens));
}

std::optional<std::size_t> RecommendableSet::index_of(Token token) const {
  const auto it = index_of_.find(token);
  if (it == index_of_.end()) return std::nullopt;
  return it->second;
}

TargetMap build_targets(std::span<const Transaction> performance, const ItemVocabulary& vocabulary,
                        const RecommendableSet& recommendable,
                        std::span<const std::string> users) {
  TargetMap targets;
  for (const auto& user : users) {
    targets.emplace(user, TargetVector{user, std::vector<std::uint8_t>(recommendable.size(), 0)});
  }
  for (const auto& t : performance) {
    const auto target = targets.find(t.user_id);
    if (target == targets.end()) continue;
    const Token token = vocabulary.token_of(t.item_id);
    if (token == kUnkToken) continue;
    if (const auto index = recommendable.index_of(token)) target->second.y[*index] = 1;
  }
  return targets;
}

// Splits --------------------------------------------------------------------

UserSplit split_users(std::vector<std::string> users, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw Error("bad_config", "train_fraction must lie in (0, 1), got " +
                                  format_double(train_fraction));
  }
  std::sort(users.begin(), users.end());
  users.erase(std::unique(users.begin(), users.end()), users.end());
  if (users.size() < 2) {
    throw Error("too_few_users", "user split needs at least 2 users, found " +
                                     std::to_string(users.size()));
  }
  const auto n_train = static_cast<std::size_t>(
      std::floor(train_fraction * static_cast<double>(users.size()) + kFractionSlack));
  if (n_train == 0 || n_train == users.size()) {
    throw Error("too_few_users", "train_fraction " + format_double(train_fraction) + " over " +
                                     std::to_string(users.size()) +
                                     " users leaves one side of the split empty");
  }
  Rng rng(seed);
  rng.shuffle(users);
  UserSplit split;
  split.train.assign(users.begin(), users.begin() + static_cast<std::ptrdiff_t>(n_train));
  split.validation.assign(users.begin() + static_cast<std::ptrdiff_t>(n_train), users.end());
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.validation.begin(), split.validation.end());
  return split;
}

PopularityFilter drop_popular_items(std::span<const Transaction> transactions,
                                    double top_fraction) {
  if (!(top_fraction >= 0.0 && top_fraction <= 1.0)) {
    throw Error("bad_config", "top_fraction must lie in [0, 1], got " + format_double(top_fraction));
  }
  std::unordered_map<std::string, std::unordered_set<std::string>> users_of;
  for (const auto& t : transactions) users_of[t.item_id].insert(t.user_id);

  std::vector<std::pair<std::string, std::size_t>> ranked;
  ranked.reserve(users_of.size());
  for (const auto& [item, users] : users_of) ranked.emplace_back(item, users.size());
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });

  const auto n_remove = static_cast<std::size_t>(
      std::ceil(top_fraction * static_cast<double>(ranked.size()) - kFractionSlack));
  PopularityFilter filter;
  std::unordered_set<std::string> removed;
  for (std::size_t i = 0; i < n_remove && i < ranked.size(); ++i) {
    filter.removed_items.push_back(ranked[i].first);
    removed.insert(ranked[i].first);
  }
  for (const auto& t : transactions) {
    if (!removed.contains(t.item_id)) filter.kept.push_back(t);
  }
  return filter;
}

std::vector<std::string> distinct_users(std::span<const Transaction> transactions) {
  std::set<std::string> users;
  for (const auto& t : transactions) users.insert(t.user_id);
  return {users.begin(), users.end()};
}

}  // namespace seqrec
