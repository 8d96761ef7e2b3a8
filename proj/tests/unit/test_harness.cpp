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
#include <cstdlib>
#include <filesystem>
#include <memory>
#include <set>

#include <gtest/gtest.h>

#include "seqrec/error.hpp"
#include "seqrec/harness/pipeline.hpp"
#include "seqrec/hash.hpp"
#include "seqrec/random.hpp"
#include "seqrec/text.hpp"
#include "testing/oracles.hpp"

namespace seqrec::harness {
namespace {

namespace fs = std::filesystem;
using testing::TempDir;

std::string error_code(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return "";
}

// 20 users with 5 rows each over 8 items; timestamps 100..104 put the last
// row of every user in the performance window at analysis date 104.
std::vector<Transaction> toy_log() {
  std::vector<Transaction> rows;
  Rng rng(11);
  for (int u = 0; u < 20; ++u) {
    for (int t = 0; t < 5; ++t) {
      rows.push_back({"user" + std::to_string(u), "item" + std::to_string(rng.below(8)), 100 + t});
    }
  }
  return rows;
}

const ExperimentConfig& base_config(const TempDir& dir, const std::vector<Transaction>& rows,
                                    std::int64_t analysis_date, const std::string& extra,
                                    ExperimentConfig& out) {
  testing::write_generic_csv(dir / "log.csv", rows);
  out = load_config(testing::write_config(dir.path(), dir / "log.csv", analysis_date, 7, extra));
  return out;
}

TEST(Config, ParsesKeysAndResolvesRelativePaths) {
  const auto c = parse_config(
      "# comment\n"
      "data.path = logs/x.csv\n"
      "split.analysis_date = 2020-01-02\n"
      "seed = 9\n"
      "eval.k_list = 1, 5, 10\n"
      "model.hidden_widths = 8,8,4,2\n"
      "rank.score = probability\n",
      "/base");
  EXPECT_EQ(c.data_path, fs::path("/base/logs/x.csv"));
  EXPECT_EQ(c.analysis_date, 1577923200);
  EXPECT_EQ(c.require_seed(), 9u);
  EXPECT_EQ(c.model.seed, 9u);
  EXPECT_EQ(c.k_values, (std::vector<std::size_t>{1, 5, 10}));
  EXPECT_EQ(c.model.hidden_widths, (std::vector<std::size_t>{8, 8, 4, 2}));
  EXPECT_TRUE(c.rank_by_probability);
}

TEST(Config, Errors) {
  EXPECT_EQ(error_code([] { parse_config("no equals sign\n", "."); }), "bad_config");
  EXPECT_EQ(error_code([] { parse_config("bogus.key = 1\n", "."); }), "bad_config");
  EXPECT_EQ(error_code([] { parse_config("split.analysis_date = yesterday\n", "."); }), "bad_config");
  EXPECT_EQ(error_code([] { parse_config("data.path = x\n", ".").require_seed(); }), "bad_config");
  EXPECT_EQ(error_code([] { load_config("/nonexistent/experiment.conf"); }), "missing_config");
}

TEST(Config, HashIgnoresOutputDirectoryOnly) {
  const auto a = parse_config("seed = 1\noutput.dir = a\n", ".");
  const auto b = parse_config("seed = 1\noutput.dir = b\n", ".");
  const auto c = parse_config("seed = 2\noutput.dir = a\n", ".");
  EXPECT_EQ(config_hash(a), config_hash(b));
  EXPECT_NE(config_hash(a), config_hash(c));
}

TEST(Prepare, ToyLogWritesFourListedArtifacts) {
  TempDir dir;
  ExperimentConfig config;
  base_config(dir, toy_log(), 104, "", config);
  const auto summary = cmd_prepare(config);
  EXPECT_EQ(summary.data_rows, 100u);
  EXPECT_EQ(summary.rejected_rows, 0u);
  EXPECT_EQ(summary.observation_rows, 80u);
  EXPECT_EQ(summary.performance_rows, 20u);
  EXPECT_EQ(summary.train_users + summary.validation_users, 20u);
  ASSERT_EQ(summary.manifest.artifacts.size(), 4u);
  const fs::path prepare = OutputLayout{config.output_dir}.prepare();
  for (const auto& a : summary.manifest.artifacts) {
    EXPECT_EQ(sha256_file(prepare / a.path), a.sha256) << a.path;
  }
  EXPECT_FALSE(fs::exists(prepare / kRejectsFile));
  EXPECT_EQ(summary.manifest.input_hash, sha256_file(config.data_path));

  const auto again = cmd_prepare(config);
  ASSERT_EQ(again.manifest.artifacts.size(), 4u);
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_EQ(again.manifest.artifacts[i].path, summary.manifest.artifacts[i].path);
    EXPECT_EQ(again.manifest.artifacts[i].sha256, summary.manifest.artifacts[i].sha256);
  }
  EXPECT_EQ(read_manifest(prepare / "manifest.json").config_hash, config_hash(config));
}

TEST(Prepare, RejectedRowsAreReportedWithLineNumbers) {
  TempDir dir;
  ExperimentConfig config;
  base_config(dir, toy_log(), 104, "", config);
  std::string text = read_file(config.data_path);
  text += "user0,item1,not-a-time\n";
  write_file(config.data_path, text);
  const auto summary = cmd_prepare(config);
  EXPECT_EQ(summary.rejected_rows, 1u);
  EXPECT_EQ(summary.manifest.artifacts.size(), 5u);
  const std::string report = read_file(OutputLayout{config.output_dir}.prepare() / kRejectsFile);
  EXPECT_NE(report.find("102"), std::string::npos) << report;
}

TEST(Prepare, MissingInputAndSeed) {
  TempDir dir;
  ExperimentConfig config;
  base_config(dir, toy_log(), 104, "", config);
  fs::remove(config.data_path);
  EXPECT_EQ(error_code([&] { cmd_prepare(config); }), "missing_input");
  ExperimentConfig unseeded = parse_config("data.path = x.csv\n", dir.path());
  EXPECT_EQ(error_code([&] { cmd_prepare(unseeded); }), "bad_config");
}

TEST(Train, MissingArtifactIsNamed) {
  TempDir dir;
  ExperimentConfig config;
  base_config(dir, toy_log(), 104, "", config);
  cmd_prepare(config);
  const fs::path targets = OutputLayout{config.output_dir}.prepare() / kTargetsFile;
  fs::remove(targets);
  try {
    cmd_train(config, Method::kNgram);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), "missing_artifact");
    EXPECT_NE(std::string(e.what()).find(targets.string()), std::string::npos) << e.what();
  }
}

TEST(Train, TamperedArtifactIsStale) {
  TempDir dir;
  ExperimentConfig config;
  base_config(dir, toy_log(), 104, "", config);
  cmd_prepare(config);
  const fs::path split = OutputLayout{config.output_dir}.prepare() / kSplitFile;
  write_file(split, read_file(split) + "\n");
  EXPECT_EQ(error_code([&] { cmd_train(config, Method::kNgram); }), "stale_artifact");
}

// One planted-pattern experiment shared by the evaluate and recommend tests.
class PlantedPipeline : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new TempDir("seqrec-harness");
    data_ = new testing::PlantedData(testing::planted_pattern(200, 1));
    auto rows = data_->transactions;
    // A user whose only item falls below vocab.min_count.
    rows.push_back({"zcold", "rare", 1500});
    rows.push_back({"zcold", "i2", 5000});
    config_ = new ExperimentConfig();
    base_config(*dir_, rows, data_->analysis_date,
                testing::planted_model_config() +
                    "vocab.min_count = 2\nmf.k = 4\neval.methods = seq,cf,mf,ngram,random\n",
                *config_);
    cmd_prepare(*config_);
    for (Method m : {Method::kSeq, Method::kCf, Method::kMf, Method::kNgram}) {
      summaries_->push_back(cmd_train(*config_, m));
    }
    evaluation_ = new EvaluateSummary(cmd_evaluate(*config_, configured_methods(*config_)));
  }
  static void TearDownTestSuite() {
    delete evaluation_;
    delete config_;
    delete data_;
    delete dir_;
    summaries_->clear();
  }

  static const SystemMetrics& metrics(const std::string& name) {
    for (const auto& s : evaluation_->report.systems) {
      if (s.system == name) return s;
    }
    throw std::runtime_error("no system " + name);
  }

  static inline TempDir* dir_ = nullptr;
  static inline testing::PlantedData* data_ = nullptr;
  static inline ExperimentConfig* config_ = nullptr;
  static inline EvaluateSummary* evaluation_ = nullptr;
  static inline std::unique_ptr<std::vector<TrainSummary>> summaries_ =
      std::make_unique<std::vector<TrainSummary>>();
};

TEST_F(PlantedPipeline, SequenceTrainingHalvesTheLoss) {
  const auto& report = *summaries_->at(0).outcome.seq_report;
  ASSERT_GE(report.epochs.size(), 2u);
  const double start = report.epochs.front().train_loss;
  double best = start;
  for (const auto& e : report.epochs) best = std::min(best, e.train_loss);
  EXPECT_LE(best, 0.5 * start);
  const fs::path models = OutputLayout{config_->output_dir}.models();
  EXPECT_TRUE(fs::is_regular_file(models / "seq.ckpt"));
  EXPECT_EQ(read_file(models / "seq_train_report.csv").substr(0, 34),
            "epoch,train_loss,val_loss,seconds\n");
}

TEST_F(PlantedPipeline, BaselineArtifacts) {
  const fs::path models = OutputLayout{config_->output_dir}.models();
  const auto& mf = summaries_->at(2).outcome;
  EXPECT_TRUE(fs::is_regular_file(models / "mf.ckpt"));
  EXPECT_EQ(mf.mf_mse.size(), config_->mf.epochs);
  EXPECT_TRUE(fs::is_regular_file(models / "mf_train_report.csv"));
  const auto& ngram = summaries_->at(3).outcome;
  EXPECT_EQ(ngram.files, std::vector<fs::path>{models / "ngram.ckpt"});
  EXPECT_FALSE(ngram.seq_report.has_value());
  EXPECT_TRUE(ngram.mf_mse.empty());
  const auto manifest = read_manifest(models / "ngram.manifest.json");
  ASSERT_EQ(manifest.artifacts.size(), 1u);
  EXPECT_EQ(manifest.artifacts[0].sha256, sha256_file(models / "ngram.ckpt"));
}

TEST_F(PlantedPipeline, ReportHasOneRowPerMethodOverTheSameUsers) {
  const auto rows = testing::read_csv(OutputLayout{config_->output_dir}.reports() / "metrics.csv");
  ASSERT_EQ(rows.size(), 6u);
  EXPECT_EQ(rows[0], (std::vector<std::string>{"system", "MAP@1", "MAP@10", "NDCG",
                                               "evaluated_users", "skipped_users"}));
  for (std::size_t i = 2; i < rows.size(); ++i) {
    EXPECT_EQ(rows[i][4], rows[1][4]);
    EXPECT_EQ(rows[i][5], rows[1][5]);
  }
}

TEST_F(PlantedPipeline, ThreeMethodReport) {
  ExperimentConfig c = *config_;
  c.output_dir = dir_->path() / "three";
  fs::create_directories(c.output_dir);
  fs::copy(OutputLayout{config_->output_dir}.prepare(), OutputLayout{c.output_dir}.prepare());
  fs::copy(OutputLayout{config_->output_dir}.models(), OutputLayout{c.output_dir}.models());
  const std::vector<Method> three = {Method::kSeq, Method::kCf, Method::kMf};
  const auto summary = cmd_evaluate(c, three);
  const auto lines = split(summary.csv, '\n');
  EXPECT_EQ(lines.size(), 5u);  // header, three rows, trailing newline
  EXPECT_EQ(lines[0].substr(0, 24), "system,MAP@1,MAP@10,NDCG");
}

TEST_F(PlantedPipeline, PlantedOrderingSeqOverNgramOverRandom) {
  const double seq = metrics("seq").map_at_k.at(1);
  const double ngram = metrics("ngram").map_at_k.at(1);
  const double random = metrics("random").map_at_k.at(1);
  EXPECT_GT(seq, ngram);
  EXPECT_GT(ngram, random);
}

TEST_F(PlantedPipeline, EvaluateRerunIsByteIdentical) {
  const fs::path reports = OutputLayout{config_->output_dir}.reports();
  const std::string first = read_file(reports / "metrics.csv");
  const std::string per_item = read_file(reports / "per_item.csv");
  cmd_evaluate(*config_, configured_methods(*config_));
  EXPECT_EQ(read_file(reports / "metrics.csv"), first);
  EXPECT_EQ(read_file(reports / "per_item.csv"), per_item);
}

TEST_F(PlantedPipeline, CheckpointFromAnotherVocabularyIsFatal) {
  TempDir other;
  auto rows = data_->transactions;
  rows.push_back({"u000", "brand-new-item", 1001});
  ExperimentConfig c;
  base_config(other, rows, data_->analysis_date, testing::planted_model_config(), c);
  cmd_prepare(c);
  fs::copy(OutputLayout{config_->output_dir}.models(), OutputLayout{c.output_dir}.models());
  const std::vector<Method> seq = {Method::kSeq};
  EXPECT_EQ(error_code([&] { cmd_evaluate(c, seq); }), "vocabulary_mismatch");
  EXPECT_EQ(error_code([&] { cmd_recommend(c, Method::kNgram, 3, std::nullopt); }),
            "vocabulary_mismatch");
}

TEST_F(PlantedPipeline, MissingCheckpointIsNamed) {
  ExperimentConfig c = *config_;
  c.output_dir = dir_->path() / "nomodels";
  fs::create_directories(c.output_dir);
  fs::copy(OutputLayout{config_->output_dir}.prepare(), OutputLayout{c.output_dir}.prepare());
  const std::vector<Method> cf = {Method::kCf};
  try {
    cmd_evaluate(c, cf);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), "missing_artifact");
    EXPECT_NE(std::string(e.what()).find("cf.ckpt"), std::string::npos);
  }
}

TEST_F(PlantedPipeline, RecommendOneRowPerUserAtKOne) {
  const auto summary = cmd_recommend(*config_, Method::kSeq, 1, std::nullopt);
  const auto rows = testing::read_csv(summary.output);
  ASSERT_EQ(rows.size(), 1 + summary.recommendations.size());
  EXPECT_EQ(rows[0], (std::vector<std::string>{"user_id", "rank", "item_id", "uplift",
                                               "probability", "fallback"}));
  const Dataset data = read_dataset(OutputLayout{config_->output_dir}.prepare());
  EXPECT_EQ(summary.recommendations.size(), data.validation_users.size());
  std::set<std::string> users;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    EXPECT_EQ(rows[i][1], "1");
    users.insert(rows[i][0]);
  }
  EXPECT_EQ(users.size(), data.validation_users.size());
}

TEST_F(PlantedPipeline, UserListWithColdAndUnknownUsers) {
  const fs::path list = dir_->path() / "users.txt";
  write_file(list, "# users\nu001\nzcold\nnobody\n");
  const auto summary = cmd_recommend(*config_, Method::kSeq, 3, list);
  ASSERT_EQ(summary.recommendations.size(), 3u) << summary.recommendations.front().user_id << " " << summary.recommendations.back().user_id;
  EXPECT_EQ(summary.unknown_users, std::vector<std::string>{"nobody"});
  EXPECT_FALSE(summary.recommendations[0].fallback);
  EXPECT_TRUE(summary.recommendations[1].fallback);
  EXPECT_TRUE(summary.recommendations[2].fallback);
  const auto rows = testing::read_csv(summary.output);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    EXPECT_EQ(rows[i][5], rows[i][0] == "u001" ? "0" : "1");
  }
  EXPECT_EQ(error_code([&] { cmd_recommend(*config_, Method::kSeq, 3, dir_->path() / "none.txt"); }),
            "missing_input");
}

TEST_F(PlantedPipeline, EmittedItemsStayInsideTheAllowedSet) {
  ExperimentConfig c = *config_;
  c.allowed_items = {"i3", "i5", "i7"};
  c.priority_items = {"i5"};
  c.exclude_history = true;
  for (Method m : {Method::kSeq, Method::kCf, Method::kMf, Method::kNgram, Method::kRandom}) {
    const auto summary = cmd_recommend(c, m, 2, std::nullopt);
    for (const auto& rec : summary.recommendations) {
      for (const auto& item : rec.items) {
        const std::string id = read_dataset(OutputLayout{c.output_dir}.prepare()).vocabulary.item_of(item.token);
        EXPECT_TRUE(id == "i3" || id == "i5" || id == "i7") << id;
      }
    }
  }
}

TEST_F(PlantedPipeline, AblationAtZeroEqualsEvaluate) {
  ExperimentConfig c = *config_;
  c.top_fraction = 0.0;
  const auto summary = cmd_ablate(c);
  EXPECT_TRUE(summary.removed_items.empty());
  EXPECT_EQ(summary.csv, evaluation_->csv);
}

TEST_F(PlantedPipeline, AblatedItemsNeverRecommended) {
  ExperimentConfig c = *config_;
  c.top_fraction = 0.10;
  c.output_dir = dir_->path() / "ablate";
  fs::create_directories(c.output_dir);
  fs::copy(OutputLayout{config_->output_dir}.prepare(), OutputLayout{c.output_dir}.prepare());
  const auto summary = cmd_ablate(c);
  ASSERT_EQ(summary.removed_items.size(), 2u);  // ceil(10% of 11 items)
  const fs::path dir = OutputLayout{c.output_dir}.ablation();
  EXPECT_EQ(read_file(dir / "removed_items.txt"),
            summary.removed_items[0] + "\n" + summary.removed_items[1] + "\n");
  std::size_t rows = 0;
  for (const auto& e : fs::directory_iterator(dir / "recommendations")) {
    for (const auto& row : testing::read_csv(e.path())) {
      ++rows;
      EXPECT_NE(row[2], summary.removed_items[0]) << e.path();
      EXPECT_NE(row[2], summary.removed_items[1]) << e.path();
    }
  }
  EXPECT_GT(rows, 100u);

  const std::string first = read_file(dir / "metrics.csv");
  cmd_ablate(c);
  EXPECT_EQ(read_file(dir / "metrics.csv"), first);
}

// Retraining with the validation users' performance rows scrambled leaves
// every checkpoint unchanged; so does reordering the rows of the input file.
TEST(Leakage, PerformanceRowsOfValidationUsersNeverReachTraining) {
  const auto data = testing::planted_pattern(120, 3);
  const std::string extra = testing::planted_model_config() + "model.epochs = 5\nmf.k = 4\n";
  TempDir a;
  ExperimentConfig ca;
  base_config(a, data.transactions, data.analysis_date, extra, ca);
  cmd_prepare(ca);
  const Dataset prepared = read_dataset(OutputLayout{ca.output_dir}.prepare());
  const std::set<std::string> validation(prepared.validation_users.begin(),
                                         prepared.validation_users.end());

  auto rows = data.transactions;
  Rng rng(99);
  std::vector<std::size_t> slots;
  std::vector<std::string> items;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].timestamp >= data.analysis_date && validation.contains(rows[i].user_id)) {
      slots.push_back(i);
      items.push_back("i" + std::to_string(rng.below(10)));
    }
  }
  ASSERT_FALSE(slots.empty());
  for (std::size_t j = 0; j < slots.size(); ++j) rows[slots[j]].item_id = items[j];
  rng.shuffle(rows);
  TempDir b;
  ExperimentConfig cb;
  base_config(b, rows, data.analysis_date, extra, cb);
  cmd_prepare(cb);
  EXPECT_EQ(read_dataset(OutputLayout{cb.output_dir}.prepare()).validation_users,
            prepared.validation_users);

  for (Method m : {Method::kSeq, Method::kCf, Method::kMf, Method::kNgram}) {
    cmd_train(ca, m);
    cmd_train(cb, m);
    const std::string file = checkpoint_file(m);
    EXPECT_EQ(read_file(OutputLayout{ca.output_dir}.models() / file),
              read_file(OutputLayout{cb.output_dir}.models() / file))
        << file;
  }
}

TEST(Determinism, TwoFullRunsMatchByteForByte) {
  const auto data = testing::planted_pattern(120, 5);
  const std::string extra = testing::planted_model_config() +
                            "model.epochs = 8\nmf.k = 4\neval.methods = seq,cf,mf,ngram,random,popularity\n"
                            "ablation.top_fraction = 0.1\n";
  TempDir input;
  testing::write_generic_csv(input / "log.csv", data.transactions);
  std::vector<std::unique_ptr<TempDir>> dirs;
  for (int run = 0; run < 2; ++run) {
    dirs.push_back(std::make_unique<TempDir>());
    const ExperimentConfig c = load_config(testing::write_config(
        dirs.back()->path(), input / "log.csv", data.analysis_date, 7, extra));
    cmd_prepare(c);
    for (Method m : {Method::kSeq, Method::kCf, Method::kMf, Method::kNgram}) cmd_train(c, m);
    cmd_evaluate(c, configured_methods(c));
    cmd_ablate(c);
    for (Method m : configured_methods(c)) cmd_recommend(c, m, 5, std::nullopt);
  }
  const auto diff = testing::diff_output_trees(*dirs[0] / "out", *dirs[1] / "out");
  EXPECT_TRUE(diff.empty()) << "first difference: " << diff.front() << "\n"
                            << read_file(*dirs[0] / "out" / diff.front()) << "\n"
                            << read_file(*dirs[1] / "out" / diff.front());
}

}  // namespace
}  // namespace seqrec::harness
