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
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "seqrec/baselines.hpp"
#include "seqrec/ingest.hpp"
#include "seqrec/metrics.hpp"
#include "seqrec/seqmodel.hpp"

namespace seqrec::harness {

// Flat `key = value` experiment description. Lines starting with '#' are
// comments; relative paths resolve against the config file's directory.
// Every constant without a value in the source method has a default here.
struct ExperimentConfig {
  // data
  std::filesystem::path data_path;
  InputFormat data_format = InputFormat::kGenericCsv;
  // split
  std::int64_t analysis_date = 0;
  std::string performance_horizon;  // free-text note, e.g. "6 months"
  double train_fraction = 0.8;
  std::optional<std::uint64_t> seed;  // mandatory, from the file or an override
  // vocabulary and sequences
  std::size_t min_count = 1;
  std::size_t max_seq_len = kDefaultMaxSequenceLength;
  std::vector<std::string> recommendable_items;  // empty: every vocabulary item
  // Keep only items of I' that at least this many training users interacted
  // with in the performance window; 0 keeps all. Without support the base
  // popularity of an item sits at the floor and its uplift is meaningless.
  std::size_t min_train_support = 0;
  // sequence model
  ModelConfig model;
  // Share of training users held out to pick the best epoch; 0 keeps the
  // last epoch. Validation users never influence training.
  double selection_fraction = 0.1;
  // baselines
  InteractionMode interaction_mode = InteractionMode::kCount;
  std::size_t cf_neighborhood = kDefaultNeighborhood;
  MfConfig mf;
  std::size_t ngram_order = 3;
  double ngram_alpha = 0.1;
  bool ngram_backoff = true;
  // ranking and evaluation
  std::vector<std::string> methods = {"seq", "cf", "mf", "ngram"};
  std::vector<std::size_t> k_values = {1, 10};
  std::size_t ndcg_length = 10;
  ApNormalization ap_normalization = ApNormalization::kRelevantInTopK;
  bool zero_relevant_in_map = false;
  std::size_t recommend_k = 10;
  // Sequence-model ranking key: uplift R = P_u / P(i), or P_u itself.
  bool rank_by_probability = false;
  std::vector<std::string> allowed_items;   // empty: all of I'
  std::vector<std::string> priority_items;
  bool exclude_history = false;
  // ablation
  double top_fraction = 0.10;
  // output
  std::filesystem::path output_dir = "out";

  std::uint64_t require_seed() const;
  // Propagates the experiment seed into the model and baseline configs.
  void apply_seed(std::uint64_t value);
};

ExperimentConfig parse_config(std::string_view text, const std::filesystem::path& base_dir);
ExperimentConfig load_config(const std::filesystem::path& path);

// Accepts integer epoch seconds or an ISO date (YYYY-MM-DD, midnight UTC).
std::int64_t parse_timestamp(std::string_view text);

// Canonical sorted `key=value` listing of every resolved setting except the
// output directory, which does not affect results.
std::string canonical_form(const ExperimentConfig& config);
std::string config_hash(const ExperimentConfig& config);

std::vector<std::string> split_list(std::string_view text);

}  // namespace seqrec::harness
