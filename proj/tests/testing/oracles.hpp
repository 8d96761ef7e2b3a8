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

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "seqrec/ingest.hpp"
#include "seqrec/metrics.hpp"
#include "seqrec/seqmodel.hpp"

namespace seqrec::testing {

// Independent metric implementations: recount everything per cut-off.
double brute_dcg(const std::vector<int>& relevances, std::size_t p);
double brute_ndcg(std::span<const Token> ranked, const RelevantSet& relevant, std::size_t p);
double brute_ap(std::span<const Token> ranked, const RelevantSet& relevant, std::size_t k);

struct MetricOracleResult {
  std::size_t cases = 0;        // (ranked list, relevance pattern) pairs
  std::size_t comparisons = 0;  // metric values compared, every cut-off
  std::size_t mismatches = 0;
  std::string first_mismatch;
};

// Every permutation of lists of length 1..max_length under every binary
// relevance pattern; ndcg and ap_at_k at every cut-off against the brute-force
// versions above, compared with ==.
MetricOracleResult run_metric_oracle(std::size_t max_length);

// |a - n| / max(|a|, |n|, floor).
double relative_error(double analytic, double numeric, double floor = 1e-6);

// Central differences of `objective` with respect to every entry of `x`,
// compared with `analytic`. Returns the largest relative error.
double max_fd_error(std::span<double> x, std::span<const double> analytic,
                    const std::function<double()>& objective, double step = 1e-5);

// Synthetic log over items i0..i9. Histories are a noisy walk along the cycle
// i2 -> i3 -> ... -> i9 -> i2; roughly half the users then buy A = i0 as their
// last observed item and only B = i1 in the performance window. Everyone else
// buys the cycle successor of their last item. B appears in histories only as
// noise, and never right after A.
struct PlantedData {
  std::vector<Transaction> transactions;
  std::int64_t analysis_date = 0;
  std::vector<std::string> ends_in_a;  // sorted user ids
};

inline constexpr const char* kPlantedA = "i0";
inline constexpr const char* kPlantedB = "i1";

PlantedData planted_pattern(std::size_t users = 200, std::uint64_t seed = 1);

// Model settings used wherever the planted pattern must be learned, as a
// ModelConfig and as config-file lines.
ModelConfig planted_model(std::uint64_t seed);
std::string planted_model_config();

// Prepared in-memory form of a planted log: vocabulary over the observation
// window, I' = every item, an 80/20 user split.
struct PlantedSet {
  ItemVocabulary vocabulary;
  RecommendableSet recommendable;
  SequenceMap sequences;
  TargetMap targets;
  std::vector<std::string> train_users;
  std::vector<std::string> validation_users;
};

PlantedSet planted_set(const PlantedData& data, std::uint64_t split_seed);

class TempDir {
 public:
  explicit TempDir(const std::string& prefix = "seqrec-test");
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

void write_generic_csv(const std::filesystem::path& path, std::span<const Transaction> rows);

// Config file for a generic-csv data set; `extra` lines are appended verbatim.
std::filesystem::path write_config(const std::filesystem::path& dir,
                                   const std::filesystem::path& data, std::int64_t analysis_date,
                                   std::uint64_t seed, const std::string& extra = {});

std::vector<std::vector<std::string>> read_csv(const std::filesystem::path& path);

// Relative paths that differ between two output trees, including files
// present on one side only. Manifests are compared without their timestamps
// or train-report hashes, and train reports without the seconds column.
std::vector<std::string> diff_output_trees(const std::filesystem::path& a,
                                           const std::filesystem::path& b);

}  // namespace seqrec::testing
