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

#include "seqrec/harness/artifacts.hpp"

#include <algorithm>
#include <set>

#include "seqrec/error.hpp"
#include "seqrec/text.hpp"

namespace seqrec::harness {
namespace {

std::string join_tokens(std::span<const Token> tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += ' ';
    out += std::to_string(tokens[i]);
  }
  return out;
}

[[noreturn]] void malformed(const std::filesystem::path& file, std::size_t line,
                            std::string_view what) {
  throw Error("bad_artifact", file.string() + ":" + std::to_string(line) + ": " + std::string(what));
}

Token to_token(const std::filesystem::path& file, std::size_t line, std::string_view text) {
  const auto v = parse_int64(text);
  if (!v || *v < 0 || *v > INT32_MAX) malformed(file, line, "bad token '" + std::string(text) + "'");
  return static_cast<Token>(*v);
}

std::vector<Token> parse_tokens(const std::filesystem::path& file, std::size_t line,
                                std::string_view text) {
  std::vector<Token> out;
  for (const auto part : split(text, ' ')) {
    if (!part.empty()) out.push_back(to_token(file, line, part));
  }
  return out;
}

// Data lines of a TSV file with the given header, split into fields.
std::vector<std::vector<std::string_view>> read_tsv(const std::filesystem::path& file,
                                                    const std::string& contents,
                                                    std::string_view header,
                                                    std::size_t fields) {
  std::vector<std::vector<std::string_view>> rows;
  const auto lines = split(contents, '\n');
  if (lines.empty() || lines.front() != header) malformed(file, 1, "unexpected header");
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    auto cols = split(lines[i], '\t');
    if (cols.size() != fields) malformed(file, i + 1, "wrong field count");
    rows.push_back(std::move(cols));
  }
  return rows;
}

std::string require_file(const std::filesystem::path& path) {
  if (!std::filesystem::is_regular_file(path)) {
    throw Error("missing_artifact", "missing artifact " + path.string());
  }
  return read_file(path);
}

}  // namespace

RecommendableSet restrict_by_support(const Dataset& data, std::size_t min_support) {
  std::vector<std::size_t> support(data.recommendable.size(), 0);
  for (const auto& user : data.train_users) {
    const auto& y = data.targets.at(user).y;
    for (std::size_t k = 0; k < y.size(); ++k) support[k] += y[k];
  }
  std::vector<Token> kept;
  for (std::size_t k = 0; k < support.size(); ++k) {
    if (support[k] >= min_support) kept.push_back(data.recommendable.token_at(k));
  }
  if (kept.empty()) {
    throw Error("empty_recommendable", "no recommendable item reaches the minimum training support");
  }
  return RecommendableSet(std::move(kept));
}

RecommendableSet resolve_recommendable(const ItemVocabulary& vocabulary,
                                       const std::vector<std::string>& items,
                                       std::vector<std::string>* warnings) {
  if (items.empty()) return RecommendableSet::all_items(vocabulary);
  std::set<Token> tokens;
  for (const auto& item : items) {
    if (!vocabulary.contains(item)) {
      if (warnings) warnings->push_back("recommendable item '" + item + "' is not in the vocabulary");
      continue;
    }
    tokens.insert(vocabulary.token_of(item));
  }
  if (tokens.empty()) throw Error("empty_recommendable", "no recommendable item is in the vocabulary");
  return RecommendableSet(std::vector<Token>(tokens.begin(), tokens.end()));
}

PreparedData prepare_dataset(std::span<const Transaction> transactions,
                             const ExperimentConfig& config) {
  PreparedData out;
  out.windows = split_by_analysis_date(transactions, config.analysis_date);
  out.warnings = out.windows.warnings;
  Dataset& d = out.dataset;
  d.vocabulary = ItemVocabulary::build(out.windows.observation, config.min_count);
  d.recommendable = resolve_recommendable(d.vocabulary, config.recommendable_items, &out.warnings);
  d.sequences = build_sequences(out.windows.observation, d.vocabulary, config.max_seq_len);

  std::vector<std::string> users;
  for (const auto& [user, seq] : d.sequences) users.push_back(user);
  auto split = split_users(users, config.train_fraction, config.require_seed());
  d.train_users = std::move(split.train);
  d.validation_users = std::move(split.validation);
  d.targets = build_targets(out.windows.performance, d.vocabulary, d.recommendable, users);
  if (config.min_train_support > 0) {
    d.recommendable = restrict_by_support(d, config.min_train_support);
    d.targets = build_targets(out.windows.performance, d.vocabulary, d.recommendable, users);
  }
  return out;
}

std::vector<std::filesystem::path> write_dataset(const std::filesystem::path& dir,
                                                 const Dataset& d) {
  std::vector<bool> flag(d.vocabulary.size(), false);
  for (Token t : d.recommendable.tokens()) flag.at(static_cast<std::size_t>(t)) = true;

  std::string vocab = "token\titem_id\tcount\trecommendable\n";
  Token token = kFirstItemToken;
  for (const auto& entry : d.vocabulary.entries()) {
    vocab += std::to_string(token) + "\t" + entry.item_id + "\t" + std::to_string(entry.count) +
             "\t" + (flag[static_cast<std::size_t>(token)] ? "1" : "0") + "\n";
    ++token;
  }

  std::string sequences = "user_id\ttokens\n";
  for (const auto& [user, seq] : d.sequences) {
    sequences += user + "\t" + join_tokens(seq.tokens) + "\n";
  }

  std::string targets = "user_id\tpositive_tokens\n";
  for (const auto& [user, target] : d.targets) {
    std::vector<Token> positives;
    for (std::size_t k = 0; k < target.y.size(); ++k) {
      if (target.y[k]) positives.push_back(d.recommendable.token_at(k));
    }
    targets += user + "\t" + join_tokens(positives) + "\n";
  }

  std::string split = "user_id\tpartition\n";
  for (const auto& u : d.train_users) split += u + "\ttrain\n";
  for (const auto& u : d.validation_users) split += u + "\tvalidation\n";

  const std::vector<std::pair<const char*, const std::string*>> files = {
      {kVocabularyFile, &vocab}, {kSequencesFile, &sequences}, {kTargetsFile, &targets},
      {kSplitFile, &split}};
  std::vector<std::filesystem::path> paths;
  for (const auto& [name, contents] : files) {
    paths.push_back(dir / name);
    write_file(paths.back(), *contents);
  }
  return paths;
}

Dataset read_dataset(const std::filesystem::path& dir) {
  const std::filesystem::path vocab_path = dir / kVocabularyFile;
  const std::filesystem::path seq_path = dir / kSequencesFile;
  const std::filesystem::path target_path = dir / kTargetsFile;
  const std::filesystem::path split_path = dir / kSplitFile;
  const std::string vocab_text = require_file(vocab_path);
  const std::string seq_text = require_file(seq_path);
  const std::string target_text = require_file(target_path);
  const std::string split_text = require_file(split_path);

  Dataset d;
  std::vector<ItemVocabulary::Entry> entries;
  std::vector<Token> recommendable;
  std::size_t line = 1;
  for (const auto& cols :
       read_tsv(vocab_path, vocab_text, "token\titem_id\tcount\trecommendable", 4)) {
    ++line;
    const Token token = to_token(vocab_path, line, cols[0]);
    if (token != static_cast<Token>(entries.size()) + kFirstItemToken) {
      malformed(vocab_path, line, "tokens are not dense");
    }
    const auto count = parse_int64(cols[2]);
    if (!count || *count < 0) malformed(vocab_path, line, "bad count");
    entries.push_back({std::string(cols[1]), static_cast<std::size_t>(*count)});
    if (cols[3] == "1") recommendable.push_back(token);
  }
  d.vocabulary = ItemVocabulary::from_entries(std::move(entries));
  d.recommendable = RecommendableSet(std::move(recommendable));

  line = 1;
  for (const auto& cols : read_tsv(seq_path, seq_text, "user_id\ttokens", 2)) {
    ++line;
    UserSequence seq{std::string(cols[0]), parse_tokens(seq_path, line, cols[1])};
    for (Token t : seq.tokens) {
      if (static_cast<std::size_t>(t) >= d.vocabulary.size()) malformed(seq_path, line, "token out of range");
    }
    d.sequences.emplace(seq.user_id, std::move(seq));
  }

  line = 1;
  for (const auto& cols : read_tsv(target_path, target_text, "user_id\tpositive_tokens", 2)) {
    ++line;
    TargetVector target{std::string(cols[0]), std::vector<std::uint8_t>(d.recommendable.size(), 0)};
    for (Token t : parse_tokens(target_path, line, cols[1])) {
      const auto index = d.recommendable.index_of(t);
      if (!index) malformed(target_path, line, "positive token outside the recommendable set");
      target.y[*index] = 1;
    }
    d.targets.emplace(target.user_id, std::move(target));
  }

  line = 1;
  for (const auto& cols : read_tsv(split_path, split_text, "user_id\tpartition", 2)) {
    ++line;
    if (cols[1] == "train") {
      d.train_users.emplace_back(cols[0]);
    } else if (cols[1] == "validation") {
      d.validation_users.emplace_back(cols[0]);
    } else {
      malformed(split_path, line, "partition must be train or validation");
    }
  }
  for (const auto* users : {&d.train_users, &d.validation_users}) {
    for (const auto& u : *users) {
      if (!d.sequences.contains(u) || !d.targets.contains(u)) {
        throw Error("bad_artifact", "split user " + u + " lacks a sequence or target row");
      }
    }
  }
  return d;
}

}  // namespace seqrec::harness
