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

// seqrec: prepare | train | evaluate | ablate | recommend
//
// On failure prints one JSON object {"error": code, "message": text} on
// stderr and exits nonzero.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "seqrec/error.hpp"
#include "seqrec/harness/config.hpp"
#include "seqrec/harness/pipeline.hpp"

namespace {

using seqrec::harness::ExperimentConfig;
using seqrec::harness::Method;

struct Overrides {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> methods;
  std::optional<std::size_t> k;
  std::optional<double> top_fraction;
  std::optional<std::string> users;
};

void add_common(CLI::App& cmd, Overrides& o) {
  cmd.add_option("--config", o.config_path, "experiment config file")->required();
  cmd.add_option("--seed", o.seed, "override the config seed");
}

int fail(const std::string& code, const std::string& message, int status) {
  std::cerr << nlohmann::json{{"error", code}, {"message", message}}.dump() << '\n';
  return status;
}

ExperimentConfig load(const Overrides& o) {
  ExperimentConfig config = seqrec::harness::load_config(o.config_path);
  if (o.seed) config.apply_seed(*o.seed);
  if (o.top_fraction) config.top_fraction = *o.top_fraction;
  if (o.k) config.recommend_k = *o.k;
  if (!o.methods.empty()) config.methods = o.methods;
  config.require_seed();
  return config;
}

void print_report(const std::string& csv) { std::cout << csv; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sequence-aware recommendation experiments"};
  app.require_subcommand(1);
  Overrides o;

  auto* prepare = app.add_subcommand("prepare", "split, tokenize and persist the training data");
  add_common(*prepare, o);

  auto* train = app.add_subcommand("train", "fit one system on the training users");
  add_common(*train, o);
  std::string train_method;
  train->add_option("--method", train_method, "seq, cf, mf or ngram")->required();

  auto* evaluate = app.add_subcommand("evaluate", "score validation rankings for each method");
  add_common(*evaluate, o);
  evaluate->add_option("--method", o.methods, "methods to compare (default: eval.methods)")
      ->delimiter(',');

  auto* ablate = app.add_subcommand("ablate", "retrain without the most popular items");
  add_common(*ablate, o);
  ablate->add_option("--top-fraction", o.top_fraction, "share of items to drop");
  ablate->add_option("--method", o.methods, "methods to compare (default: eval.methods)")
      ->delimiter(',');

  auto* recommend = app.add_subcommand("recommend", "emit top-K lists");
  add_common(*recommend, o);
  std::string rec_method;
  recommend->add_option("--method", rec_method, "system to rank with")->required();
  recommend->add_option("--k", o.k, "list length (default: rank.k)");
  recommend->add_option("--users", o.users, "file with one user id per line");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail("usage", e.what(), 2);
  }

  try {
    const ExperimentConfig config = load(o);
    if (prepare->parsed()) {
      const auto s = seqrec::harness::cmd_prepare(config);
      for (const auto& w : s.warnings) std::cerr << "warning: " << w << '\n';
      std::cout << "rows " << s.data_rows << " (rejected " << s.rejected_rows << "), observation "
                << s.observation_rows << ", performance " << s.performance_rows << "\n"
                << "items " << s.items << ", recommendable " << s.recommendable_items << "\n"
                << "users train " << s.train_users << ", validation " << s.validation_users
                << '\n';
    } else if (train->parsed()) {
      const auto s = seqrec::harness::cmd_train(config, seqrec::harness::parse_method(train_method));
      if (s.outcome.seq_report) {
        const auto& r = *s.outcome.seq_report;
        std::cout << "epochs " << r.epochs.size() - 1 << ", best epoch " << r.best_epoch
                  << ", loss " << r.epochs.front().train_loss << " -> "
                  << r.epochs.back().train_loss << '\n';
      }
      if (!s.outcome.mf_mse.empty()) {
        std::cout << "observed-entry mse " << s.outcome.mf_mse.back() << '\n';
      }
      for (const auto& f : s.outcome.files) std::cout << "wrote " << f.string() << '\n';
    } else if (evaluate->parsed()) {
      const auto methods = seqrec::harness::configured_methods(config);
      print_report(seqrec::harness::cmd_evaluate(config, methods).csv);
    } else if (ablate->parsed()) {
      const auto s = seqrec::harness::cmd_ablate(config);
      std::cerr << "removed " << s.removed_items.size() << " items";
      if (s.dropped_train_users) {
        std::cerr << ", " << s.dropped_train_users << " training users left without history";
      }
      std::cerr << '\n';
      print_report(s.csv);
    } else if (recommend->parsed()) {
      std::optional<std::filesystem::path> users;
      if (o.users) users = *o.users;
      const auto s = seqrec::harness::cmd_recommend(
          config, seqrec::harness::parse_method(rec_method), config.recommend_k, users);
      for (const auto& u : s.unknown_users) {
        std::cerr << "unknown user " << u << ": served the popularity fallback\n";
      }
      std::cout << "wrote " << s.output.string() << " (" << s.recommendations.size()
                << " users)\n";
    }
  } catch (const seqrec::Error& e) {
    return fail(e.code(), e.what(), 1);
  } catch (const std::exception& e) {
    return fail("internal", e.what(), 1);
  }
  return 0;
}
