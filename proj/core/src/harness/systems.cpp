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

#include "seqrec/harness/systems.hpp"

#include <algorithm>
#include <exception>
#include <thread>

#include "seqrec/error.hpp"
#include "seqrec/hash.hpp"
#include "seqrec/random.hpp"
#include "seqrec/text.hpp"

namespace seqrec::harness {
namespace {

constexpr std::uint64_t kSelectionSeedSalt = 0x5e1ec7;

std::string_view checkpoint_kind(Method method) {
  switch (method) {
    case Method::kSeq: return "sequence_model";
    case Method::kCf: return "item_knn";
    case Method::kMf: return "matrix_factorization";
    case Method::kNgram: return "ngram";
    default: return "";
  }
}

std::vector<bool> mask_of(const Dataset& data, const std::vector<std::string>& items,
                          std::string_view what) {
  if (items.empty()) return {};
  std::vector<bool> mask(data.recommendable.size(), false);
  for (const auto& item : items) {
    if (!data.vocabulary.contains(item)) continue;
    if (const auto index = data.recommendable.index_of(data.vocabulary.token_of(item))) {
      mask[*index] = true;
    }
  }
  if (what == "allowed" && std::none_of(mask.begin(), mask.end(), [](bool b) { return b; })) {
    throw Error("empty_allowed_set", "no configured allowed item is in the recommendable set");
  }
  return mask;
}

std::string format_mse_csv(std::span<const double> mse) {
  std::string out = "epoch,mse\n";
  for (std::size_t e = 0; e < mse.size(); ++e) {
    out += std::to_string(e + 1) + "," + format_double(mse[e]) + "\n";
  }
  return out;
}

}  // namespace

Method parse_method(std::string_view name) {
  if (name == "seq") return Method::kSeq;
  if (name == "cf") return Method::kCf;
  if (name == "mf") return Method::kMf;
  if (name == "ngram") return Method::kNgram;
  if (name == "popularity") return Method::kPopularity;
  if (name == "random") return Method::kRandom;
  throw Error("unknown_method", "unknown method '" + std::string(name) +
                                    "' (seq, cf, mf, ngram, popularity, random)");
}

std::string_view to_string(Method method) {
  switch (method) {
    case Method::kSeq: return "seq";
    case Method::kCf: return "cf";
    case Method::kMf: return "mf";
    case Method::kNgram: return "ngram";
    case Method::kPopularity: return "popularity";
    case Method::kRandom: return "random";
  }
  return "";
}

bool is_trainable(Method method) {
  return method != Method::kPopularity && method != Method::kRandom;
}

std::string checkpoint_file(Method method) { return std::string(to_string(method)) + ".ckpt"; }

TrainOutcome train_system(Method method, const Dataset& data, const ExperimentConfig& config,
                          const std::filesystem::path& models_dir) {
  if (!is_trainable(method)) {
    throw Error("not_trainable", std::string(to_string(method)) + " needs no training");
  }
  if (data.train_users.empty()) throw Error("no_training_users", "no training users");
  TrainOutcome out;
  const std::string& vocab_hash = data.vocabulary.hash();
  const auto ckpt_path = models_dir / checkpoint_file(method);
  out.files.push_back(ckpt_path);

  switch (method) {
    case Method::kSeq: {
      std::vector<std::string> fit_users = data.train_users;
      std::vector<std::string> selection_users;
      if (config.selection_fraction > 0.0 && data.train_users.size() >= 2) {
        auto split = split_users(data.train_users, 1.0 - config.selection_fraction,
                                 config.require_seed() ^ kSelectionSeedSalt);
        fit_users = std::move(split.train);
        selection_users = std::move(split.validation);
      }
      SequenceModel model(data.vocabulary.size(), data.recommendable.size(), config.model,
                          vocab_hash);
      out.seq_report = train(model, TrainingSet{data.sequences, data.targets, fit_users,
                                                selection_users});
      save_checkpoint(ckpt_path, model.to_checkpoint());
      const auto report_path = models_dir / "seq_train_report.csv";
      write_file(report_path, format_train_report_csv(*out.seq_report));
      out.files.push_back(report_path);
      break;
    }
    case Method::kCf: {
      const auto matrix = InteractionMatrix::from_sequences(
          data.sequences, data.train_users, data.vocabulary.size(), config.interaction_mode);
      const auto knn = ItemKnn::fit(matrix, config.cf_neighborhood, config.interaction_mode);
      save_checkpoint(ckpt_path, knn.to_checkpoint(vocab_hash));
      break;
    }
    case Method::kMf: {
      const auto matrix = InteractionMatrix::from_sequences(
          data.sequences, data.train_users, data.vocabulary.size(), config.interaction_mode);
      const auto result = mf_train(matrix, config.mf);
      save_checkpoint(ckpt_path, mf_to_checkpoint(result, config.mf, vocab_hash));
      out.mf_mse = result.epoch_mse;
      const auto report_path = models_dir / "mf_train_report.csv";
      write_file(report_path, format_mse_csv(out.mf_mse));
      out.files.push_back(report_path);
      break;
    }
    case Method::kNgram: {
      const auto table = ngram_train(data.sequences, data.train_users, config.ngram_order,
                                     config.ngram_alpha, data.vocabulary.size(),
                                     config.ngram_backoff);
      save_checkpoint(ckpt_path, table.to_checkpoint(vocab_hash));
      break;
    }
    default: break;
  }
  return out;
}

Scorer::Scorer(Method method, const Dataset& data, std::uint64_t seed)
    : method_(method),
      data_(&data),
      seed_(seed),
      base_(BasePopularity::estimate(data.targets, data.train_users)) {}

Scorer Scorer::load(Method method, const Dataset& data, const std::filesystem::path& models_dir,
                    const ExperimentConfig& config) {
  Scorer scorer(method, data, config.require_seed());
  scorer.rank_by_probability_ = config.rank_by_probability;
  if (!is_trainable(method)) return scorer;
  const auto ckpt = nn::load_checkpoint(models_dir / checkpoint_file(method),
                                        data.vocabulary.hash(), checkpoint_kind(method));
  scorer.baselines_.mode = config.interaction_mode;
  switch (method) {
    case Method::kSeq:
      scorer.seq_.emplace(SequenceModel::from_checkpoint(ckpt));
      if (scorer.seq_->output_size() != data.recommendable.size()) {
        throw Error("recommendable_mismatch",
                    "sequence model scores " + std::to_string(scorer.seq_->output_size()) +
                        " items but the recommendable set has " +
                        std::to_string(data.recommendable.size()));
      }
      break;
    case Method::kCf:
      scorer.baselines_.cf.emplace(ItemKnn::from_checkpoint(ckpt));
      scorer.baselines_.mode = scorer.baselines_.cf->mode();
      break;
    case Method::kMf: scorer.baselines_.mf.emplace(mf_from_checkpoint(ckpt)); break;
    case Method::kNgram: scorer.baselines_.ngram.emplace(NGramTable::from_checkpoint(ckpt)); break;
    default: break;
  }
  return scorer;
}

void Scorer::score(const UserSequence& user, std::vector<double>& scores,
                   std::vector<double>& probabilities) const {
  const RecommendableSet& rec = data_->recommendable;
  switch (method_) {
    case Method::kSeq:
      probabilities = seq_->forward(user.tokens);
      scores = uplift(probabilities, base_);
      return;
    case Method::kCf:
    case Method::kMf:
    case Method::kNgram: {
      const auto baseline = method_ == Method::kCf   ? BaselineMethod::kCf
                            : method_ == Method::kMf ? BaselineMethod::kMf
                                                     : BaselineMethod::kNgram;
      scores = baseline_scores(baseline, baselines_, user, rec);
      probabilities = scores;
      return;
    }
    case Method::kPopularity:
      scores.assign(base_.values().begin(), base_.values().end());
      probabilities = scores;
      return;
    case Method::kRandom: {
      Rng rng(user_seed(seed_, user.user_id));
      scores.resize(rec.size());
      for (double& s : scores) s = rng.uniform();
      probabilities = scores;
      return;
    }
  }
}

Recommendation Scorer::recommend(const UserSequence& user, std::size_t k,
                                 const RankingRules& rules) const {
  if (method_ != Method::kRandom && is_cold_start(user)) {
    return popularity_fallback(user.user_id, base_, k, data_->recommendable, rules);
  }
  std::vector<double> scores;
  std::vector<double> probabilities;
  score(user, scores, probabilities);
  if (method_ == Method::kSeq && rank_by_probability_) {
    Recommendation rec =
        top_k(user.user_id, probabilities, probabilities, k, data_->recommendable, rules, user.tokens);
    for (auto& item : rec.items) item.uplift = scores[item.index];
    return rec;
  }
  return top_k(user.user_id, scores, probabilities, k, data_->recommendable, rules, user.tokens);
}

std::uint64_t user_seed(std::uint64_t seed, std::string_view user_id) {
  const std::string digest = sha256_hex(user_id);
  std::uint64_t h = 0;
  for (std::size_t i = 0; i < 16; ++i) {
    const char c = digest[i];
    h = (h << 4) | static_cast<std::uint64_t>(c <= '9' ? c - '0' : c - 'a' + 10);
  }
  return seed ^ h;
}

RankingRules ranking_rules(const Dataset& data, const ExperimentConfig& config) {
  RankingRules rules;
  rules.allowed = mask_of(data, config.allowed_items, "allowed");
  rules.priority = mask_of(data, config.priority_items, "priority");
  rules.exclude_history = config.exclude_history;
  return rules;
}

std::vector<Recommendation> recommend_users(const Scorer& scorer, const Dataset& data,
                                            std::span<const std::string> users, std::size_t k,
                                            const RankingRules& rules) {
  std::vector<Recommendation> out(users.size());
  std::vector<std::exception_ptr> errors(users.size());
  const auto work = [&](std::size_t begin, std::size_t stride) {
    for (std::size_t i = begin; i < users.size(); i += stride) {
      try {
        const auto it = data.sequences.find(users[i]);
        if (it != data.sequences.end()) {
          out[i] = scorer.recommend(it->second, k, rules);
        } else {
          out[i] = scorer.recommend(UserSequence{users[i], {}}, k, rules);
        }
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t workers =
      std::clamp<std::size_t>(std::thread::hardware_concurrency(), 1, std::max<std::size_t>(users.size(), 1));
  if (workers <= 1) {
    work(0, 1);
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work, w, workers);
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

}  // namespace seqrec::harness
