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

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "seqrec/harness/config.hpp"
#include "seqrec/ingest.hpp"

namespace seqrec::harness {

// Everything the training and evaluation commands consume.
struct Dataset {
  ItemVocabulary vocabulary;
  RecommendableSet recommendable;
  SequenceMap sequences;  // every split user
  TargetMap targets;      // every split user, indexed like `recommendable`
  std::vector<std::string> train_users;
  std::vector<std::string> validation_users;
};

struct PreparedData {
  Dataset dataset;
  WindowSplit windows;
  std::vector<std::string> warnings;
};

// Users are those with at least one observation-window transaction. Targets
// come from the performance window only.
PreparedData prepare_dataset(std::span<const Transaction> transactions,
                             const ExperimentConfig& config);

// I' from the config override (unknown items are skipped with a warning) or
// the whole vocabulary.
RecommendableSet resolve_recommendable(const ItemVocabulary& vocabulary,
                                       const std::vector<std::string>& items,
                                       std::vector<std::string>* warnings);

// Items of data.recommendable with at least `min_support` training users
// holding y = 1.
RecommendableSet restrict_by_support(const Dataset& data, std::size_t min_support);

inline constexpr const char* kVocabularyFile = "vocabulary.tsv";
inline constexpr const char* kSequencesFile = "sequences.tsv";
inline constexpr const char* kTargetsFile = "targets.tsv";
inline constexpr const char* kSplitFile = "split.tsv";
inline constexpr const char* kRejectsFile = "rejects.txt";

// Writes the four artifact files and returns their paths.
std::vector<std::filesystem::path> write_dataset(const std::filesystem::path& dir,
                                                 const Dataset& dataset);

// Throws seqrec::Error("missing_artifact") naming the first missing file.
Dataset read_dataset(const std::filesystem::path& dir);

}  // namespace seqrec::harness
