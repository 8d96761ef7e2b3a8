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

#include "seqrec/harness/pipeline.hpp"

#include <algorithm>
#include <set>
#include <unordered_set>

#include "seqrec/error.hpp"
#include "seqrec/hash.hpp"
#include "seqrec/text.hpp"

namespace seqrec::harness {
namespace {

constexpr const char* kManifestFile = "manifest.json";

OutputLayout layout_of(const ExperimentConfig& config) { return {config.output_dir}; }

// Content fingerprint of a run's outputs that ignores its timestamps.
std::string fingerprint(const RunManifest& manifest) {
  std::string listing;
  for (const auto& a : manifest.artifacts) listing += a.path + "\t" + a.sha256 + "\n";
  return sha256_hex(listing);
}

RunManifest start_manifest(std::string command, const ExperimentConfig& config) {
  RunManifest m;
  m.command = std::move(command);
  m.config_hash = config_hash(config);
  m.started_at = utc_now();
  return m;
}

void finish_manifest(RunManifest& m, const std::filesystem::path& dir,
                     const std::vector<std::filesystem::path>& files,
                     const std::filesystem::path& manifest_path) {
  add_artifacts(m, dir, files);
  m.finished_at = utc_now();
  write_manifest(manifest_path, m);
}

void require_data_file(const ExperimentConfig& config) {
  if (config.data_path.empty()) throw Error("bad_config", "config key 'data.path' is required");
  if (!std::filesystem::is_regular_file(config.data_path)) {
    throw Error("missing_input", "input data not found: " + config.data_path.string());
  }
}

// Prepared artifacts plus the fingerprint of the prepare run.
std::pair<Dataset, std::string> load_prepared(const ExperimentConfig& config) {
  const auto dir = layout_of(config).prepare();
  const RunManifest manifest = read_manifest(dir / kManifestFile);
  Dataset data = read_dataset(dir);
  for (const auto& a : manifest.artifacts) {
    if (sha256_file(dir / a.path) != a.sha256) {
      throw Error("stale_artifact", "artifact " + (dir / a.path).string() +
                                        " does not match its manifest hash");
    }
  }
  return {std::move(data), fingerprint(manifest)};
}

std::size_t ranking_length(const ExperimentConfig& config) {
  std::size_t n = config.ndcg_length;
  for (std::size_t k : config.k_values) n = std::max(n, k);
  return n;
}

std::vector<std::filesystem::path> train_all(const Dataset& data, const ExperimentConfig& config,
                                             std::span<const Method> methods,
                                             const std::filesystem::path& models_dir) {
  std::vector<std::filesystem::path> files;
  for (Method m : methods) {
    if (!is_trainable(m)) continue;
    const auto outcome = train_system(m, data, config, models_dir);
    files.insert(files.end(), outcome.files.begin(), outcome.files.end());
  }
  return files;
}

}  // namespace

std::vector<Method> configured_methods(const ExperimentConfig& config) {
  std::vector<Method> methods;
  for (const auto& name : config.methods) {
    const Method m = parse_method(name);
    if (std::find(methods.begin(), methods.end(), m) == methods.end()) methods.push_back(m);
  }
  if (methods.empty()) throw Error("bad_config", "eval.methods lists no method");
  return methods;
}

PrepareSummary cmd_prepare(const ExperimentConfig& config) {
  config.require_seed();
  require_data_file(config);
  PrepareSummary summary;
  summary.manifest = start_manifest("prepare", config);
  summary.manifest.input_hash = sha256_file(config.data_path);

  const LoadResult loaded = load_transactions(config.data_path, config.data_format);
  PreparedData prepared = prepare_dataset(loaded.transactions, config);
  const Dataset& d = prepared.dataset;

  const auto dir = layout_of(config).prepare();
  auto files = write_dataset(dir, d);
  const auto rejects_path = dir / kRejectsFile;
  if (!loaded.rejects.empty()) {
    write_file(rejects_path, format_rejects_report(loaded.rejects));
    files.push_back(rejects_path);
  } else {
    std::filesystem::remove(rejects_path);
  }
  summary.manifest.vocabulary_hash = d.vocabulary.hash();
  finish_manifest(summary.manifest, dir, files, dir / kManifestFile);

  summary.data_rows = loaded.data_rows;
  summary.rejected_rows = loaded.rejects.size();
  summary.observation_rows = prepared.windows.observation.size();
  summary.performance_rows = prepared.windows.performance.size();
  summary.items = d.vocabulary.item_count();
  summary.recommendable_items = d.recommendable.size();
  summary.train_users = d.train_users.size();
  summary.validation_users = d.validation_users.size();
  summary.warnings = std::move(prepared.warnings);
  return summary;
}

TrainSummary cmd_train(const ExperimentConfig& config, Method method) {
  config.require_seed();
  auto [data, input] = load_prepared(config);
  TrainSummary summary;
  summary.method = method;
  summary.manifest = start_manifest("train " + std::string(to_string(method)), config);
  summary.manifest.input_hash = input;
  summary.manifest.vocabulary_hash = data.vocabulary.hash();
  const auto dir = layout_of(config).models();
  summary.outcome = train_system(method, data, config, dir);
  finish_manifest(summary.manifest, dir, summary.outcome.files,
                  dir / (std::string(to_string(method)) + ".manifest.json"));
  return summary;
}

Evaluation evaluate_methods(const Dataset& data, const ExperimentConfig& config,
                            std::span<const Method> methods,
                            const std::filesystem::path& models_dir) {
  const RankingRules rules = ranking_rules(data, config);
  const std::size_t length = ranking_length(config);
  std::vector<std::pair<std::string, Rankings>> systems;
  for (Method m : methods) {
    const Scorer scorer = Scorer::load(m, data, models_dir, config);
    const auto recs = recommend_users(scorer, data, data.validation_users, length, rules);
    Rankings rankings;
    for (const auto& rec : recs) {
      auto& list = rankings[rec.user_id];
      for (const auto& item : rec.items) list.push_back(item.token);
    }
    systems.emplace_back(std::string(to_string(m)), std::move(rankings));
  }
  const Judgments judgments =
      judgments_from_targets(data.targets, data.recommendable, data.validation_users);

  Evaluation out;
  EvalOptions options;
  options.k_values = config.k_values;
  options.ndcg_length = config.ndcg_length;
  options.normalization = config.ap_normalization;
  options.zero_relevant_in_map = config.zero_relevant_in_map;
  out.report = evaluate_systems(systems, judgments, options);

  out.per_item_csv = "system,item_id,relevant_users";
  for (std::size_t k : config.k_values) out.per_item_csv += ",MAP@" + std::to_string(k);
  out.per_item_csv += "\n";
  for (const auto& [name, rankings] : systems) {
    for (Token token : data.recommendable.tokens()) {
      std::size_t users = 0;
      std::vector<double> sums(config.k_values.size(), 0.0);
      const RelevantSet only{token};
      for (const auto& [user, ranked] : rankings) {
        if (!judgments.at(user).contains(token)) continue;
        ++users;
        for (std::size_t j = 0; j < config.k_values.size(); ++j) {
          sums[j] += ap_at_k(ranked, only, config.k_values[j], config.ap_normalization);
        }
      }
      if (users == 0) continue;
      out.per_item_csv += name + "," + data.vocabulary.item_of(token) + "," + std::to_string(users);
      for (double s : sums) out.per_item_csv += "," + format_double(s / static_cast<double>(users));
      out.per_item_csv += "\n";
    }
  }
  return out;
}

EvaluateSummary cmd_evaluate(const ExperimentConfig& config, std::span<const Method> methods) {
  config.require_seed();
  auto [data, input] = load_prepared(config);
  EvaluateSummary summary;
  summary.manifest = start_manifest("evaluate", config);
  summary.manifest.input_hash = input;
  summary.manifest.vocabulary_hash = data.vocabulary.hash();
  const OutputLayout layout = layout_of(config);
  Evaluation eval = evaluate_methods(data, config, methods, layout.models());
  summary.report = std::move(eval.report);
  summary.csv = format_metric_report_csv(summary.report);
  const auto dir = layout.reports();
  write_file(dir / "metrics.csv", summary.csv);
  write_file(dir / "per_item.csv", eval.per_item_csv);
  finish_manifest(summary.manifest, dir, {dir / "metrics.csv", dir / "per_item.csv"},
                  dir / kManifestFile);
  return summary;
}

AblatedData ablate_dataset(const Dataset& prepared, std::span<const Transaction> transactions,
                           const ExperimentConfig& config, double top_fraction) {
  if (!(top_fraction >= 0.0 && top_fraction < 1.0)) {
    throw Error("bad_config", "ablation.top_fraction must lie in [0, 1)");
  }
  const std::set<std::string, std::less<>> train(prepared.train_users.begin(),
                                                 prepared.train_users.end());
  std::vector<Transaction> train_rows;
  for (const auto& t : transactions) {
    if (train.contains(t.user_id)) train_rows.push_back(t);
  }
  PopularityFilter filter = drop_popular_items(train_rows, top_fraction);

  AblatedData out;
  out.removed_items = filter.removed_items;
  Dataset& d = out.dataset;
  d.vocabulary = prepared.vocabulary;
  std::unordered_set<Token> removed;
  for (const auto& item : filter.removed_items) {
    if (prepared.vocabulary.contains(item)) removed.insert(prepared.vocabulary.token_of(item));
  }
  std::vector<Token> kept;
  for (Token t : prepared.recommendable.tokens()) {
    if (!removed.contains(t)) kept.push_back(t);
  }
  if (kept.empty()) throw Error("empty_recommendable", "ablation removed every recommendable item");
  d.recommendable = RecommendableSet(std::move(kept));

  const WindowSplit windows = split_by_analysis_date(filter.kept, config.analysis_date);
  const SequenceMap train_sequences =
      build_sequences(windows.observation, d.vocabulary, config.max_seq_len);
  for (const auto& user : prepared.train_users) {
    const auto it = train_sequences.find(user);
    if (it == train_sequences.end()) {
      ++out.dropped_train_users;
      continue;
    }
    d.sequences.emplace(user, it->second);
    d.train_users.push_back(user);
  }
  for (const auto& user : prepared.validation_users) {
    d.sequences.emplace(user, prepared.sequences.at(user));
    d.validation_users.push_back(user);
  }

  // Training targets come from the filtered rows; validation judgments keep
  // the full performance window restricted to the reduced I'.
  const WindowSplit all_windows = split_by_analysis_date(transactions, config.analysis_date);
  d.targets = build_targets(windows.performance, d.vocabulary, d.recommendable, d.train_users);
  const TargetMap validation_targets = build_targets(all_windows.performance, d.vocabulary,
                                                     d.recommendable, d.validation_users);
  d.targets.insert(validation_targets.begin(), validation_targets.end());
  return out;
}

AblationSummary cmd_ablate(const ExperimentConfig& config) {
  config.require_seed();
  require_data_file(config);
  auto [prepared, input] = load_prepared(config);
  const OutputLayout layout = layout_of(config);
  const RunManifest prepare_manifest = read_manifest(layout.prepare() / kManifestFile);
  if (sha256_file(config.data_path) != prepare_manifest.input_hash) {
    throw Error("stale_artifact", "input data " + config.data_path.string() +
                                      " changed since prepare ran");
  }
  const LoadResult loaded = load_transactions(config.data_path, config.data_format);
  AblatedData ablated = ablate_dataset(prepared, loaded.transactions, config, config.top_fraction);

  AblationSummary summary;
  summary.manifest = start_manifest("ablate", config);
  summary.manifest.input_hash = input;
  summary.manifest.vocabulary_hash = ablated.dataset.vocabulary.hash();
  summary.removed_items = ablated.removed_items;
  summary.dropped_train_users = ablated.dropped_train_users;

  const auto dir = layout.ablation();
  const auto models_dir = dir / "models";
  const std::vector<Method> methods = configured_methods(config);
  std::vector<std::filesystem::path> files;

  std::string removed;
  for (const auto& item : ablated.removed_items) removed += item + "\n";
  write_file(dir / "removed_items.txt", removed);
  files.push_back(dir / "removed_items.txt");

  const auto trained = train_all(ablated.dataset, config, methods, models_dir);
  files.insert(files.end(), trained.begin(), trained.end());

  Evaluation eval = evaluate_methods(ablated.dataset, config, methods, models_dir);
  summary.report = std::move(eval.report);
  summary.csv = format_metric_report_csv(summary.report);
  write_file(dir / "metrics.csv", summary.csv);
  write_file(dir / "per_item.csv", eval.per_item_csv);
  files.push_back(dir / "metrics.csv");
  files.push_back(dir / "per_item.csv");

  const RankingRules rules = ranking_rules(ablated.dataset, config);
  for (Method m : methods) {
    const Scorer scorer = Scorer::load(m, ablated.dataset, models_dir, config);
    const auto recs = recommend_users(scorer, ablated.dataset, ablated.dataset.validation_users,
                                      config.recommend_k, rules);
    const auto path = dir / "recommendations" / (std::string(to_string(m)) + ".csv");
    write_file(path, format_recommendations_csv(recs, ablated.dataset.vocabulary));
    files.push_back(path);
  }
  finish_manifest(summary.manifest, dir, files, dir / kManifestFile);
  return summary;
}

RecommendSummary cmd_recommend(const ExperimentConfig& config, Method method, std::size_t k,
                               const std::optional<std::filesystem::path>& users_file) {
  config.require_seed();
  auto [data, input] = load_prepared(config);
  RecommendSummary summary;
  summary.manifest = start_manifest("recommend " + std::string(to_string(method)), config);
  summary.manifest.input_hash = input;
  summary.manifest.vocabulary_hash = data.vocabulary.hash();

  std::vector<std::string> users;
  if (users_file) {
    if (!std::filesystem::is_regular_file(*users_file)) {
      throw Error("missing_input", "user list not found: " + users_file->string());
    }
    const std::string listing = read_file(*users_file);
    for (const auto line : split(listing, '\n')) {
      const auto user = trim(line);
      if (user.empty() || user.front() == '#') continue;
      users.emplace_back(user);
      if (!data.sequences.contains(users.back())) summary.unknown_users.push_back(users.back());
    }
  } else {
    users = data.validation_users;
  }

  const OutputLayout layout = layout_of(config);
  const Scorer scorer = Scorer::load(method, data, layout.models(), config);
  summary.recommendations =
      recommend_users(scorer, data, users, k, ranking_rules(data, config));
  const auto dir = layout.recommendations();
  summary.output = dir / (std::string(to_string(method)) + ".csv");
  write_file(summary.output, format_recommendations_csv(summary.recommendations, data.vocabulary));
  finish_manifest(summary.manifest, dir, {summary.output},
                  dir / (std::string(to_string(method)) + ".manifest.json"));
  return summary;
}

}  // namespace seqrec::harness
