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
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "seqrec/harness/artifacts.hpp"
#include "seqrec/harness/config.hpp"
#include "seqrec/harness/manifest.hpp"
#include "seqrec/harness/systems.hpp"
#include "seqrec/metrics.hpp"

namespace seqrec::harness {

// Output layout below ExperimentConfig::output_dir.
struct OutputLayout {
  std::filesystem::path root;

  std::filesystem::path prepare() const { return root / "prepare"; }
  std::filesystem::path models() const { return root / "models"; }
  std::filesystem::path reports() const { return root / "reports"; }
  std::filesystem::path ablation() const { return root / "ablation"; }
  std::filesystem::path recommendations() const { return root / "recommendations"; }
};

struct PrepareSummary {
  std::size_t data_rows = 0;
  std::size_t rejected_rows = 0;
  std::size_t observation_rows = 0;
  std::size_t performance_rows = 0;
  std::size_t items = 0;
  std::size_t recommendable_items = 0;
  std::size_t train_users = 0;
  std::size_t validation_users = 0;
  std::vector<std::string> warnings;
  RunManifest manifest;
};

struct TrainSummary {
  Method method = Method::kSeq;
  TrainOutcome outcome;
  RunManifest manifest;
};

struct EvaluateSummary {
  MetricReport report;
  std::string csv;
  RunManifest manifest;
};

struct AblationSummary {
  std::vector<std::string> removed_items;
  std::size_t dropped_train_users = 0;  // training users left without history
  MetricReport report;
  std::string csv;
  RunManifest manifest;
};

struct RecommendSummary {
  std::vector<Recommendation> recommendations;
  std::vector<std::string> unknown_users;  // served the popularity fallback
  std::filesystem::path output;
  RunManifest manifest;
};

PrepareSummary cmd_prepare(const ExperimentConfig& config);
TrainSummary cmd_train(const ExperimentConfig& config, Method method);
EvaluateSummary cmd_evaluate(const ExperimentConfig& config, std::span<const Method> methods);
AblationSummary cmd_ablate(const ExperimentConfig& config);
RecommendSummary cmd_recommend(const ExperimentConfig& config, Method method, std::size_t k,
                               const std::optional<std::filesystem::path>& users_file);

std::vector<Method> configured_methods(const ExperimentConfig& config);

struct Evaluation {
  MetricReport report;
  // Per-item AP@K: for each item of I', the mean over validation users who
  // interacted with it of AP@K with that item as the only relevant one.
  // Columns: system,item_id,relevant_users,MAP@<k>...
  std::string per_item_csv;
};

// Ranks the validation users of `data` with every method and scores them
// against the performance-window judgments.
Evaluation evaluate_methods(const Dataset& data, const ExperimentConfig& config,
                            std::span<const Method> methods,
                            const std::filesystem::path& models_dir);

// Training data with the most popular items removed from the training users'
// transactions. The vocabulary and validation users are unchanged; I' loses
// the removed items.
struct AblatedData {
  Dataset dataset;
  std::vector<std::string> removed_items;
  std::size_t dropped_train_users = 0;
};

AblatedData ablate_dataset(const Dataset& prepared, std::span<const Transaction> transactions,
                           const ExperimentConfig& config, double top_fraction);

}  // namespace seqrec::harness
