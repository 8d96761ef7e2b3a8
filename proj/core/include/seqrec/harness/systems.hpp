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
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "seqrec/baselines.hpp"
#include "seqrec/harness/artifacts.hpp"
#include "seqrec/harness/config.hpp"
#include "seqrec/ranking.hpp"
#include "seqrec/seqmodel.hpp"

namespace seqrec::harness {

// Trainable systems plus two reference rankers that need no checkpoint.
enum class Method { kSeq, kCf, kMf, kNgram, kPopularity, kRandom };

// Throws seqrec::Error("unknown_method").
Method parse_method(std::string_view name);
std::string_view to_string(Method method);
bool is_trainable(Method method);

std::string checkpoint_file(Method method);

struct TrainOutcome {
  std::vector<std::filesystem::path> files;  // checkpoint first, then reports
  std::optional<TrainReport> seq_report;
  std::vector<double> mf_mse;
};

// Fits `method` on the training users of `data` and writes the checkpoint and
// any report into `models_dir`.
TrainOutcome train_system(Method method, const Dataset& data, const ExperimentConfig& config,
                          const std::filesystem::path& models_dir);

// Produces ranked lists for one method. Trainable methods load their
// checkpoint and refuse one built against a different vocabulary.
class Scorer {
 public:
  static Scorer load(Method method, const Dataset& data, const std::filesystem::path& models_dir,
                     const ExperimentConfig& config);

  Method method() const { return method_; }
  const BasePopularity& base_popularity() const { return base_; }

  // Raw scores over I' (uplift for seq) and the accompanying probabilities.
  void score(const UserSequence& user, std::vector<double>& scores,
             std::vector<double>& probabilities) const;

  // Cold-start users get the popularity fallback, except under the random
  // ranker which ignores history altogether.
  Recommendation recommend(const UserSequence& user, std::size_t k,
                           const RankingRules& rules) const;

 private:
  Scorer(Method method, const Dataset& data, std::uint64_t seed);

  Method method_;
  bool rank_by_probability_ = false;
  const Dataset* data_;
  std::uint64_t seed_;
  BasePopularity base_;
  std::optional<SequenceModel> seq_;
  BaselineModels baselines_;
};

// Per-user seed of the random ranker.
std::uint64_t user_seed(std::uint64_t seed, std::string_view user_id);

// Masks for the config's allowed and priority lists (empty lists: no mask).
RankingRules ranking_rules(const Dataset& data, const ExperimentConfig& config);

// Recommendations for `users` in order. Users are scored concurrently and
// merged by position, so the result does not depend on scheduling.
std::vector<Recommendation> recommend_users(const Scorer& scorer, const Dataset& data,
                                            std::span<const std::string> users, std::size_t k,
                                            const RankingRules& rules);

}  // namespace seqrec::harness
