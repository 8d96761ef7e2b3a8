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

#include "seqrec/harness/config.hpp"

#include <charconv>
#include <chrono>
#include <functional>
#include <map>

#include "seqrec/error.hpp"
#include "seqrec/hash.hpp"
#include "seqrec/text.hpp"

namespace seqrec::harness {
namespace {

[[noreturn]] void bad_value(std::string_view key, std::string_view value, std::string_view want) {
  throw Error("bad_config",
              "config key '" + std::string(key) + "': expected " + std::string(want) + ", got '" +
                  std::string(value) + "'");
}

std::size_t to_size(std::string_view key, std::string_view value) {
  const auto v = parse_int64(value);
  if (!v || *v < 0) bad_value(key, value, "a non-negative integer");
  return static_cast<std::size_t>(*v);
}

std::uint64_t to_u64(std::string_view key, std::string_view value) {
  std::uint64_t out = 0;
  const auto* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) bad_value(key, value, "an unsigned integer");
  return out;
}

double to_double(std::string_view key, std::string_view value) {
  const auto v = parse_double(value);
  if (!v) bad_value(key, value, "a number");
  return *v;
}

bool to_bool(std::string_view key, std::string_view value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  bad_value(key, value, "true or false");
}

std::vector<std::size_t> to_size_list(std::string_view key, std::string_view value) {
  std::vector<std::size_t> out;
  for (const auto& item : split_list(value)) out.push_back(to_size(key, item));
  return out;
}

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) out += (i ? "," : "") + items[i];
  return out;
}

template <typename T>
std::string join_numbers(const std::vector<T>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) out += (i ? "," : "") + std::to_string(items[i]);
  return out;
}

std::string_view ap_name(ApNormalization n) {
  return n == ApNormalization::kRelevantInTopK ? "hits" : "min_relevant_k";
}

ApNormalization parse_ap_normalization(std::string_view key, std::string_view value) {
  if (value == "hits") return ApNormalization::kRelevantInTopK;
  if (value == "min_relevant_k") return ApNormalization::kMinRelevantAndK;
  bad_value(key, value, "hits or min_relevant_k");
}

using Setter = std::function<void(ExperimentConfig&, std::string_view, const std::filesystem::path&)>;

const std::map<std::string, Setter, std::less<>>& setters() {
  static const std::map<std::string, Setter, std::less<>> table = [] {
    std::map<std::string, Setter, std::less<>> t;
    const auto path_of = [](std::string_view v, const std::filesystem::path& base) {
      std::filesystem::path p{std::string(v)};
      return p.is_absolute() ? p : base / p;
    };
    t["data.path"] = [path_of](ExperimentConfig& c, std::string_view v, const auto& base) {
      c.data_path = path_of(v, base);
    };
    t["data.format"] = [](ExperimentConfig& c, std::string_view v, const auto&) {
      c.data_format = parse_input_format(v);
    };
    t["split.analysis_date"] = [](ExperimentConfig& c, std::string_view v, const auto&) {
      c.analysis_date = parse_timestamp(v);
    };
    t["split.performance_horizon"] = [](ExperimentConfig& c, std::string_view v, const auto&) {
      c.performance_horizon = std::string(v);
    };
    t["split.train_fraction"] = [](ExperimentConfig& c, std::string_view v, const auto&) {
      c.train_fraction = to_double("split.train_fraction", v);
    };
    t["seed"] = [](ExperimentConfig& c, std::string_view v, const auto&) {
      c.apply_seed(to_u64("seed", v));
    };
    t["vocab.min_count"] = [](ExperimentConfig& c, std::string_view v, const auto&) {
      c.min_count = to_size("vocab.min_count", v);
    };
    t["vocab.max_seq_len"] = [](ExperimentConfig& c, std::string_view v, const auto&) {
      c.max_seq_len = to_size("vocab.max_seq_len", v);
    };
    t["vocab.recommendable_items"] = [](ExperimentConfig& c, std::string_view v, const auto&) {
      c.recommendable_items = split_list(v);
    };
    t["vocab.min_train_support"] = [](ExperimentConfig& c, std::string_view v, const auto&) {
      c.min_train_support = to_size("vocab.min_train_support", v);
    };
    t["model.embedding_dim"] = [](ExperimentConfig& c, std::string_view v, const auto&) {
      c.model.embedding_dim = to_size("model.embedding_dim", v);
    };
    t["model.hidden_dim"] = [](ExperimentConfig& c, std::string_view v, const auto&) {
      c.model.hidden_dim = to_size("model.hidden_dim", v);
    };
    t["model.hidden_widths"] = [](ExperimentConfig& c, std::string_view v, const auto&) {
      c.model.hidden_widths = to_size_list("model.hidden_widths", v);
    };
    t["model.learning_rate"] = [](ExperimentConfig& c, std::string_view v, const auto&) {
      c.model.learning_rate = to_double("model.learning_rate", v);
    };
    t["model.momentum"] = [](ExperimentConfig& c, std::string_view v, const auto&) {
      c.model.momentum = to_double("model.momentum", v);
    };
    t["model.batch_size"] = [](ExperimentConfig& c, std::string_view v, const auto&) {
      c.model.batch_size = to_size("model.batch_size", v);
    };
    t["model.epochs"] = [](ExperimentConfig& c, std::string_view v, const auto&) {
      c.model.epochs = to_size("model.epochs", v);
    };
    t["model.clip_norm"] = [](ExperimentConfig& c, std::string_view v, const auto&) {
      c.model.clip_norm = to_double("model.clip_norm", v);
    };
    t["model.forget_bias"] = [](ExperimentConfig& c, std::string_view v, const auto&) {
      c.model.forget_bias = to_double("model.forget_bias", v);
    };
    t["model.loss"] = [](ExperimentConfig& c, std::string_view v, const auto&) {
      c.model.loss = parse_loss_mode(v);
    };
    t["model.selection_fraction"] = [](ExperimentConfig& c, std::string_view v, const auto&) {
      c.selection_fraction = to_double("model.selection_fraction", v);
    };
    t["baseline.interaction"] = [](ExperimentConfig& c, std::string_view v, const auto&) {
      c.interaction_mode = parse_interaction_mode(v);
    };
    t["cf.neighborhood"] = [](ExperimentConfig& c, std::string_view v, const auto&) {
      c.cf_neighborhood = to_size("cf.neighborhood", v);
    };
    t["mf.k"] = [](ExperimentConfig& c, std::string_view v, const auto&) {
      c.mf.k = to_size("mf.k", v);
    };
    t["mf.learning_rate"] = [](ExperimentConfig& c, std::string_view v, const auto&) {
      c.mf.learning_rate = to_double("mf.learning_rate", v);
    };
    t["mf.lambda"] = [](ExperimentConfig& c, std::string_view v, const auto&) {
      c.mf.regularization = to_double("mf.lambda", v);
    };
    t["mf.epochs"] = [](ExperimentConfig& c, std::string_view v, const auto&) {
      c.mf.epochs = to_size("mf.epochs", v);
    };
    t["mf.init_scale"] = [](ExperimentConfig& c, std::string_view v, const auto&) {
      c.mf.init_scale = to_double("mf.init_scale", v);
    };
    t["ngram.n"] = [](ExperimentConfig& c, std::string_view v, const auto&) {
      c.ngram_order = to_size("ngram.n", v);
    };
    t["ngram.alpha"] = [](ExperimentConfig& c, std::string_view v, const auto&) {
      c.ngram_alpha = to_double("ngram.alpha", v);
    };
    t["ngram.backoff"] = [](ExperimentConfig& c, std::string_view v, const auto&) {
      c.ngram_backoff = to_bool("ngram.backoff", v);
    };
    t["eval.methods"] = [](ExperimentConfig& c, std::string_view v, const auto&) {
      c.methods = split_list(v);
    };
    t["eval.k_list"] = [](ExperimentConfig& c, std::string_view v, const auto&) {
      c.k_values = to_size_list("eval.k_list", v);
    };
    t["eval.ndcg_p"] = [](ExperimentConfig& c, std::string_view v, const auto&) {
      c.ndcg_length = to_size("eval.ndcg_p", v);
    };
    t["eval.ap_normalization"] = [](ExperimentConfig& c, std::string_view v, const auto&) {
      c.ap_normalization = parse_ap_normalization("eval.ap_normalization", v);
    };
    t["eval.zero_relevant_in_map"] = [](ExperimentConfig& c, std::string_view v, const auto&) {
      c.zero_relevant_in_map = to_bool("eval.zero_relevant_in_map", v);
    };
    t["rank.k"] = [](ExperimentConfig& c, std::string_view v, const auto&) {
      c.recommend_k = to_size("rank.k", v);
    };
    t["rank.score"] = [](ExperimentConfig& c, std::string_view v, const auto&) {
      if (v != "uplift" && v != "probability") bad_value("rank.score", v, "uplift or probability");
      c.rank_by_probability = v == "probability";
    };
    t["rank.allowed_items"] = [](ExperimentConfig& c, std::string_view v, const auto&) {
      c.allowed_items = split_list(v);
    };
    t["rank.priority_items"] = [](ExperimentConfig& c, std::string_view v, const auto&) {
      c.priority_items = split_list(v);
    };
    t["rank.exclude_history"] = [](ExperimentConfig& c, std::string_view v, const auto&) {
      c.exclude_history = to_bool("rank.exclude_history", v);
    };
    t["ablation.top_fraction"] = [](ExperimentConfig& c, std::string_view v, const auto&) {
      c.top_fraction = to_double("ablation.top_fraction", v);
    };
    t["output.dir"] = [path_of](ExperimentConfig& c, std::string_view v, const auto& base) {
      c.output_dir = path_of(v, base);
    };
    return t;
  }();
  return table;
}

}  // namespace

std::uint64_t ExperimentConfig::require_seed() const {
  if (!seed) throw Error("bad_config", "config key 'seed' is mandatory");
  return *seed;
}

void ExperimentConfig::apply_seed(std::uint64_t value) {
  seed = value;
  model.seed = value;
  mf.seed = value;
}

std::vector<std::string> split_list(std::string_view text) {
  std::vector<std::string> out;
  for (const auto part : split(text, ',')) {
    const auto item = trim(part);
    if (!item.empty()) out.emplace_back(item);
  }
  return out;
}

std::int64_t parse_timestamp(std::string_view text) {
  if (const auto v = parse_int64(text)) return *v;
  const auto parts = split(text, '-');
  if (parts.size() == 3 && parts[0].size() == 4 && parts[1].size() == 2 && parts[2].size() == 2) {
    const auto y = parse_int64(parts[0]);
    const auto m = parse_int64(parts[1]);
    const auto d = parse_int64(parts[2]);
    if (y && m && d) {
      const std::chrono::year_month_day date{std::chrono::year(static_cast<int>(*y)),
                                             std::chrono::month(static_cast<unsigned>(*m)),
                                             std::chrono::day(static_cast<unsigned>(*d))};
      if (date.ok()) {
        return std::chrono::sys_days(date).time_since_epoch().count() * std::int64_t{86400};
      }
    }
  }
  throw Error("bad_config", "analysis date must be epoch seconds or YYYY-MM-DD, got '" +
                                std::string(text) + "'");
}

ExperimentConfig parse_config(std::string_view text, const std::filesystem::path& base_dir) {
  ExperimentConfig config;
  std::size_t line_number = 0;
  for (const auto raw : split(text, '\n')) {
    ++line_number;
    const auto line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw Error("bad_config", "config line " + std::to_string(line_number) + ": expected key = value");
    }
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    const auto it = setters().find(key);
    if (it == setters().end()) {
      throw Error("bad_config", "config line " + std::to_string(line_number) + ": unknown key '" +
                                    std::string(key) + "'");
    }
    it->second(config, value, base_dir);
  }
  return config;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  if (!std::filesystem::is_regular_file(path)) {
    throw Error("missing_config", "config file not found: " + path.string());
  }
  return parse_config(read_file(path), path.parent_path());
}

std::string canonical_form(const ExperimentConfig& c) {
  std::map<std::string, std::string> kv;
  kv["data.path"] = c.data_path.generic_string();
  kv["data.format"] = std::string(to_string(c.data_format));
  kv["split.analysis_date"] = std::to_string(c.analysis_date);
  kv["split.performance_horizon"] = c.performance_horizon;
  kv["split.train_fraction"] = format_double(c.train_fraction);
  kv["seed"] = c.seed ? std::to_string(*c.seed) : "";
  kv["vocab.min_count"] = std::to_string(c.min_count);
  kv["vocab.max_seq_len"] = std::to_string(c.max_seq_len);
  kv["vocab.recommendable_items"] = join(c.recommendable_items);
  kv["vocab.min_train_support"] = std::to_string(c.min_train_support);
  kv["model.embedding_dim"] = std::to_string(c.model.embedding_dim);
  kv["model.hidden_dim"] = std::to_string(c.model.hidden_dim);
  kv["model.hidden_widths"] = join_numbers(c.model.hidden_widths);
  kv["model.learning_rate"] = format_double(c.model.learning_rate);
  kv["model.momentum"] = format_double(c.model.momentum);
  kv["model.batch_size"] = std::to_string(c.model.batch_size);
  kv["model.epochs"] = std::to_string(c.model.epochs);
  kv["model.clip_norm"] = format_double(c.model.clip_norm);
  kv["model.forget_bias"] = format_double(c.model.forget_bias);
  kv["model.loss"] = std::string(seqrec::to_string(c.model.loss));
  kv["model.selection_fraction"] = format_double(c.selection_fraction);
  kv["baseline.interaction"] = std::string(to_string(c.interaction_mode));
  kv["cf.neighborhood"] = std::to_string(c.cf_neighborhood);
  kv["mf.k"] = std::to_string(c.mf.k);
  kv["mf.learning_rate"] = format_double(c.mf.learning_rate);
  kv["mf.lambda"] = format_double(c.mf.regularization);
  kv["mf.epochs"] = std::to_string(c.mf.epochs);
  kv["mf.init_scale"] = format_double(c.mf.init_scale);
  kv["ngram.n"] = std::to_string(c.ngram_order);
  kv["ngram.alpha"] = format_double(c.ngram_alpha);
  kv["ngram.backoff"] = c.ngram_backoff ? "true" : "false";
  kv["eval.methods"] = join(c.methods);
  kv["eval.k_list"] = join_numbers(c.k_values);
  kv["eval.ndcg_p"] = std::to_string(c.ndcg_length);
  kv["eval.ap_normalization"] = std::string(ap_name(c.ap_normalization));
  kv["eval.zero_relevant_in_map"] = c.zero_relevant_in_map ? "true" : "false";
  kv["rank.k"] = std::to_string(c.recommend_k);
  kv["rank.score"] = c.rank_by_probability ? "probability" : "uplift";
  kv["rank.allowed_items"] = join(c.allowed_items);
  kv["rank.priority_items"] = join(c.priority_items);
  kv["rank.exclude_history"] = c.exclude_history ? "true" : "false";
  kv["ablation.top_fraction"] = format_double(c.top_fraction);
  std::string out;
  for (const auto& [k, v] : kv) out += k + "=" + v + "\n";
  return out;
}

std::string config_hash(const ExperimentConfig& config) {
  return sha256_hex(canonical_form(config));
}

}  // namespace seqrec::harness
