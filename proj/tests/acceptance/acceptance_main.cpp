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

// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
// criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "seqrec/baselines.hpp"
#include "seqrec/harness/pipeline.hpp"
#include "seqrec/metrics.hpp"
#include "seqrec/random.hpp"
#include "seqrec/ranking.hpp"
#include "seqrec/text.hpp"
#include "testing/gradient_suite.hpp"
#include "testing/oracles.hpp"

namespace {

namespace fs = std::filesystem;
using namespace seqrec;
using namespace seqrec::harness;
using seqrec::testing::TempDir;

struct Outcome {
  bool pass = false;
  std::string detail;
  std::vector<std::string> info;
};

struct Criterion {
  std::string name;
  double budget_seconds;
  std::function<Outcome()> run;
};

std::string fmt(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

// ---------------------------------------------------------------------------

Outcome gradient_soundness() {
  const auto cases = seqrec::testing::run_gradient_suite(12);
  double worst = 0.0;
  const seqrec::testing::GradientCase* worst_case = nullptr;
  for (const auto& c : cases) {
    if (!worst_case || c.max_rel_error > worst) {
      worst = c.max_rel_error;
      worst_case = &c;
    }
  }
  Outcome out;
  out.pass = cases.size() >= 100 && worst < 1e-4;
  out.detail = std::to_string(cases.size()) + " cases, max relative error " + fmt(worst) +
               " (" + worst_case->op + " " + worst_case->shape + ")";
  return out;
}

Outcome metric_oracle() {
  const auto r = seqrec::testing::run_metric_oracle(6);
  Outcome out;
  out.pass = r.mismatches == 0;
  out.detail = std::to_string(r.cases) + " ranked lists, " + std::to_string(r.comparisons) +
               " comparisons, " + std::to_string(r.mismatches) + " mismatches";
  if (!out.pass) out.detail += "; first: " + r.first_mismatch;
  return out;
}

// ---------------------------------------------------------------------------

ExperimentConfig planted_experiment(const TempDir& dir, const seqrec::testing::PlantedData& data,
                                    const std::string& extra) {
  seqrec::testing::write_generic_csv(dir / "log.csv", data.transactions);
  return load_config(seqrec::testing::write_config(
      dir.path(), dir / "log.csv", data.analysis_date, 7,
      seqrec::testing::planted_model_config() + "mf.k = 4\n" + extra));
}

Outcome planted_pattern() {
  const auto data = seqrec::testing::planted_pattern(200, 1);
  TempDir dir("seqrec-accept");
  const ExperimentConfig config = planted_experiment(dir, data, "");
  cmd_prepare(config);
  const auto trained = cmd_train(config, Method::kSeq);
  const TrainReport& report = *trained.outcome.seq_report;
  const double start = report.epochs.front().train_loss;
  const double kept = report.epochs.at(report.best_epoch).train_loss;
  const double drop = 1.0 - kept / start;

  const OutputLayout layout{config.output_dir};
  const Dataset dataset = read_dataset(layout.prepare());
  const Scorer scorer = Scorer::load(Method::kSeq, dataset, layout.models(), config);
  const std::set<std::string> ends_in_a(data.ends_in_a.begin(), data.ends_in_a.end());
  const Token b = dataset.vocabulary.token_of(seqrec::testing::kPlantedB);
  std::size_t users = 0, hits = 0;
  for (const auto& user : dataset.validation_users) {
    if (!ends_in_a.contains(user)) continue;
    ++users;
    const auto rec = scorer.recommend(dataset.sequences.at(user), 1, {});
    if (!rec.items.empty() && rec.items.front().token == b) ++hits;
  }
  const double share = users ? static_cast<double>(hits) / static_cast<double>(users) : 0.0;
  Outcome out;
  out.pass = users > 0 && share >= 0.90 && drop >= 0.50;
  out.detail = "B ranked first by uplift for " + std::to_string(hits) + "/" +
               std::to_string(users) + " validation users ending in A (" + fmt(100 * share, 3) +
               "%), train loss " + fmt(start) + " -> " + fmt(kept) + " (-" +
               fmt(100 * drop, 3) + "%)";
  return out;
}

// ---------------------------------------------------------------------------

SequenceMap corpus(const std::vector<std::vector<Token>>& seqs) {
  SequenceMap m;
  for (std::size_t i = 0; i < seqs.size(); ++i) {
    const std::string id = "s" + std::to_string(i);
    m.emplace(id, UserSequence{id, seqs[i]});
  }
  return m;
}

Outcome baseline_oracles() {
  std::vector<std::string> failures;

  // MF on a fully observed rank-1 10x10 matrix.
  Rng rng(7);
  std::vector<double> a(10), b(10);
  for (double& v : a) v = rng.uniform(0.5, 1.5);
  for (double& v : b) v = rng.uniform(0.5, 1.5);
  InteractionMatrix rank_one(12);
  for (std::size_t u = 0; u < 10; ++u) {
    InteractionRow row;
    for (std::size_t i = 0; i < 10; ++i) row.emplace_back(static_cast<Token>(2 + i), a[u] * b[i]);
    rank_one.add_user("u" + std::to_string(u), row);
  }
  MfConfig mf;
  mf.k = 1;
  mf.learning_rate = 0.05;
  mf.regularization = 0.0;
  mf.epochs = 400;
  mf.seed = 1;
  const double mse = mf_train(rank_one, mf).epoch_mse.back();
  if (!(mse < 1e-2)) failures.push_back("MF MSE " + fmt(mse));

  // CF on the 3-user/3-item fixture: columns a = (1,1,0), b = (2,0,1), c = (0,1,3).
  InteractionMatrix m(3);
  const std::vector<std::vector<double>> dense = {{1, 2, 0}, {1, 0, 1}, {0, 1, 3}};
  for (std::size_t u = 0; u < 3; ++u) {
    InteractionRow row;
    for (std::size_t i = 0; i < 3; ++i) {
      if (dense[u][i] > 0) row.emplace_back(static_cast<Token>(i), dense[u][i]);
    }
    m.add_user("u" + std::to_string(u), row);
  }
  const double ab = 2.0 / (std::sqrt(2.0) * std::sqrt(5.0));
  const double ac = 1.0 / (std::sqrt(2.0) * std::sqrt(10.0));
  const double bc = 3.0 / (std::sqrt(5.0) * std::sqrt(10.0));
  struct Case {
    std::size_t user;
    Token item;
    std::size_t J;
    double expected;
  };
  const std::vector<Case> cases = {
      {0, 2, 2, (2.0 * bc + 1.0 * ac) / (bc + ac)}, {1, 1, 2, (1.0 * ab + 1.0 * bc) / (ab + bc)},
      {2, 0, 2, (1.0 * ab + 3.0 * ac) / (ab + ac)}, {2, 0, 1, (1.0 * ab) / ab},
      {0, 2, 1, (2.0 * bc) / bc},                   {1, 2, 2, (0.0 * bc + 1.0 * ac) / (bc + ac)},
  };
  std::size_t cf_mismatch = 0;
  for (const auto& c : cases) {
    if (cf_predict(m, c.user, c.item, c.J).value != c.expected) ++cf_mismatch;
  }
  if (cf_mismatch) failures.push_back(std::to_string(cf_mismatch) + " CF mismatches");

  // n-gram at alpha = 0 against a raw enumeration of (context, next) counts.
  Rng g(15);
  std::size_t ngram_checked = 0, ngram_mismatch = 0;
  for (int trial = 0; trial < 5; ++trial) {
    const std::size_t vocab = 4 + g.below(10);
    const std::size_t order = 2 + g.below(3);
    std::vector<std::vector<Token>> seqs;
    for (std::size_t tokens = 0; tokens < 2000;) {
      std::vector<Token> s(1 + g.below(30));
      for (auto& v : s) v = static_cast<Token>(2 + g.below(vocab - 2));
      tokens += s.size();
      seqs.push_back(std::move(s));
    }
    const auto corp = corpus(seqs);
    std::vector<std::string> ids;
    for (const auto& [id, s] : corp) ids.push_back(id);
    const auto table = ngram_train(corp, ids, order, 0.0, vocab);
    std::map<std::vector<Token>, std::map<Token, std::size_t>> counts;
    for (const auto& s : seqs) {
      for (std::size_t t = 0; t < s.size(); ++t) {
        for (std::size_t len = 0; len < order && len <= t; ++len) {
          ++counts[std::vector<Token>(s.begin() + static_cast<long>(t - len),
                                      s.begin() + static_cast<long>(t))][s[t]];
        }
      }
    }
    for (const auto& [ctx, next] : counts) {
      std::size_t total = 0;
      for (const auto& [tok, c] : next) total += c;
      const auto p = table.predict(ctx);
      for (Token tok = 0; tok < static_cast<Token>(vocab); ++tok) {
        const auto it = next.find(tok);
        const double want =
            static_cast<double>(it == next.end() ? 0 : it->second) / static_cast<double>(total);
        ++ngram_checked;
        if (p[static_cast<std::size_t>(tok)] != want) ++ngram_mismatch;
      }
    }
  }
  if (ngram_mismatch) failures.push_back(std::to_string(ngram_mismatch) + " n-gram mismatches");

  Outcome out;
  out.pass = failures.empty();
  out.detail = "MF rank-1 MSE " + fmt(mse) + "; CF " + std::to_string(cases.size() - cf_mismatch) +
               "/" + std::to_string(cases.size()) + " exact; n-gram " +
               std::to_string(ngram_checked - ngram_mismatch) + "/" +
               std::to_string(ngram_checked) + " exact";
  return out;
}

// ---------------------------------------------------------------------------

const SystemMetrics& system_metrics(const MetricReport& report, const std::string& name) {
  for (const auto& s : report.systems) {
    if (s.system == name) return s;
  }
  throw std::runtime_error("no system " + name);
}

Outcome movielens() {
  Outcome out;
  const fs::path csv = SEQREC_MOVIELENS_CSV;
  if (!fs::is_regular_file(csv)) {
    out.detail = "ratings file " + csv.string() +
                 " is missing; run tools/fetch_movielens.py --out " + csv.string();
    return out;
  }
  TempDir dir("seqrec-movielens");
  ExperimentConfig config = load_config(SEQREC_MOVIELENS_CONFIG);
  config.data_path = csv;
  config.output_dir = dir / "out";
  const auto prepared = cmd_prepare(config);
  if (prepared.data_rows != 100000) {
    out.detail = "expected 100000 ratings, read " + std::to_string(prepared.data_rows);
    return out;
  }
  cmd_train(config, Method::kSeq);
  cmd_train(config, Method::kNgram);
  const std::vector<Method> methods = {Method::kSeq, Method::kNgram, Method::kRandom,
                                       Method::kPopularity};
  const auto summary = cmd_evaluate(config, methods);
  const auto& seq = system_metrics(summary.report, "seq");
  const auto& ngram = system_metrics(summary.report, "ngram");
  const auto& random = system_metrics(summary.report, "random");
  const auto& popularity = system_metrics(summary.report, "popularity");

  // Expected MAP@1 of a uniform ranking: mean over evaluated users of |rel| / |I'|.
  const Dataset data = read_dataset(OutputLayout{config.output_dir}.prepare());
  double analytic = 0.0;
  std::size_t users = 0;
  for (const auto& user : data.validation_users) {
    const auto& y = data.targets.at(user).y;
    const auto relevant = static_cast<double>(std::count(y.begin(), y.end(), 1));
    if (relevant == 0) continue;
    analytic += relevant / static_cast<double>(y.size());
    ++users;
  }
  analytic /= static_cast<double>(std::max<std::size_t>(users, 1));

  const double s1 = seq.map_at_k.at(1);
  out.pass = s1 >= 5.0 * analytic && seq.ndcg >= ngram.ndcg;
  out.detail = "uplift ranking over " + std::to_string(seq.evaluated_users) +
               " users: seq MAP@1 " + fmt(s1) + " vs 5 x random " + fmt(5 * analytic) +
               " (" + fmt(s1 / analytic, 3) + "x), seq NDCG " + fmt(seq.ndcg) + " vs ngram " +
               fmt(ngram.ndcg);
  out.info.push_back("|I'| = " + std::to_string(data.recommendable.size()) +
                     ", realized random MAP@1 " + fmt(random.map_at_k.at(1)) + " NDCG " +
                     fmt(random.ndcg) + ", popularity MAP@1 " +
                     fmt(popularity.map_at_k.at(1)) + " NDCG " + fmt(popularity.ndcg));

  ExperimentConfig by_probability = config;
  by_probability.rank_by_probability = true;
  const std::vector<Method> seq_only = {Method::kSeq};
  const auto alt = evaluate_methods(data, by_probability, seq_only,
                                    OutputLayout{config.output_dir}.models());
  const auto& p = alt.report.systems.front();
  out.info.push_back("seq ranked by probability instead: MAP@1 " + fmt(p.map_at_k.at(1)) + " (" +
                     fmt(p.map_at_k.at(1) / analytic, 3) + "x random), NDCG " + fmt(p.ndcg));
  return out;
}

// ---------------------------------------------------------------------------

Outcome ablation_audit() {
  const auto data = seqrec::testing::planted_pattern(200, 2);
  TempDir dir("seqrec-ablate");
  const ExperimentConfig config = planted_experiment(
      dir, data, "eval.methods = seq,cf,mf,ngram,popularity,random\nablation.top_fraction = 0.10\n");
  cmd_prepare(config);
  const auto first = cmd_ablate(config);
  const fs::path ablation = OutputLayout{config.output_dir}.ablation();

  const std::set<std::string> removed(first.removed_items.begin(), first.removed_items.end());
  std::size_t lists = 0, leaks = 0;
  std::map<fs::path, std::string> snapshot;
  for (const auto& e : fs::directory_iterator(ablation / "recommendations")) {
    snapshot[e.path()] = read_file(e.path());
    std::set<std::string> seen_users;
    for (const auto& row : seqrec::testing::read_csv(e.path())) {
      if (row[0] == "user_id") continue;
      seen_users.insert(row[0]);
      if (removed.contains(row[2])) ++leaks;
    }
    lists += seen_users.size();
  }
  for (const char* name : {"metrics.csv", "per_item.csv", "removed_items.txt"}) {
    snapshot[ablation / name] = read_file(ablation / name);
  }

  cmd_ablate(config);
  std::size_t changed = 0;
  for (const auto& [path, text] : snapshot) {
    if (read_file(path) != text) ++changed;
  }
  Outcome out;
  out.pass = !removed.empty() && lists > 0 && leaks == 0 && changed == 0;
  std::string names;
  for (const auto& item : first.removed_items) names += (names.empty() ? "" : ",") + item;
  out.detail = "removed " + names + "; " + std::to_string(leaks) +
               " removed items across " + std::to_string(lists) + " recommendation lists; " +
               std::to_string(changed) + "/" + std::to_string(snapshot.size()) +
               " outputs changed on regeneration";
  return out;
}

// ---------------------------------------------------------------------------

Outcome ranking_algebra() {
  Rng rng(21);
  std::size_t scaling_failures = 0, identity_failures = 0;
  const std::size_t cases = 1000;
  for (std::size_t c = 0; c < cases; ++c) {
    const std::size_t n = 2 + rng.below(40);
    std::vector<Token> tokens(n);
    for (std::size_t i = 0; i < n; ++i) tokens[i] = static_cast<Token>(kFirstItemToken + i);
    const RecommendableSet rec(tokens);
    std::vector<double> base(n), p(n), scaled(n);
    for (std::size_t i = 0; i < n; ++i) {
      base[i] = rng.uniform(1e-3, 1.0);
      p[i] = rng.uniform(0.0, 1.0);
    }
    const double factor = std::exp(rng.uniform(-5.0, 5.0));
    for (std::size_t i = 0; i < n; ++i) scaled[i] = factor * p[i];
    const BasePopularity popularity(base);
    const std::size_t k = 1 + rng.below(n);
    const auto r1 = top_k("u", uplift(p, popularity), p, k, rec);
    const auto r2 = top_k("u", uplift(scaled, popularity), scaled, k, rec);
    bool same = r1.items.size() == r2.items.size();
    for (std::size_t i = 0; same && i < r1.items.size(); ++i) {
      same = r1.items[i].token == r2.items[i].token;
    }
    if (!same) ++scaling_failures;
    for (double r : uplift(base, popularity)) {
      if (r != 1.0) ++identity_failures;
    }
  }
  Outcome out;
  out.pass = scaling_failures == 0 && identity_failures == 0;
  out.detail = std::to_string(cases - scaling_failures) + "/" + std::to_string(cases) +
               " scaled cases with identical top-K; " + std::to_string(identity_failures) +
               " uplift values off 1 when P_u = P(i)";
  return out;
}

// ---------------------------------------------------------------------------

Outcome end_to_end_determinism() {
  const auto data = seqrec::testing::planted_pattern(200, 4);
  TempDir input("seqrec-det-input");
  seqrec::testing::write_generic_csv(input / "log.csv", data.transactions);
  std::vector<std::unique_ptr<TempDir>> runs;
  std::size_t files = 0;
  for (int run = 0; run < 2; ++run) {
    runs.push_back(std::make_unique<TempDir>("seqrec-det"));
    const ExperimentConfig config = load_config(seqrec::testing::write_config(
        runs.back()->path(), input / "log.csv", data.analysis_date, 7,
        seqrec::testing::planted_model_config() +
            "mf.k = 4\neval.methods = seq,cf,mf,ngram,popularity,random\n"));
    cmd_prepare(config);
    for (Method m : {Method::kSeq, Method::kCf, Method::kMf, Method::kNgram}) cmd_train(config, m);
    cmd_evaluate(config, configured_methods(config));
    cmd_ablate(config);
    for (Method m : configured_methods(config)) cmd_recommend(config, m, 10, std::nullopt);
    files = 0;
    for (const auto& e : fs::recursive_directory_iterator(config.output_dir)) {
      if (e.is_regular_file()) ++files;
    }
  }
  const auto diff = seqrec::testing::diff_output_trees(*runs[0] / "out", *runs[1] / "out");
  Outcome out;
  out.pass = diff.empty();
  out.detail = std::to_string(files - diff.size()) + "/" + std::to_string(files) +
               " artifacts identical (manifest timestamps and train-report seconds excluded)";
  if (!diff.empty()) out.detail += "; first difference " + diff.front();
  return out;
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {"gradient-soundness", 60, gradient_soundness},
      {"metric-oracle", 60, metric_oracle},
      {"planted-pattern", 120, planted_pattern},
      {"baseline-oracles", 0, baseline_oracles},
      {"movielens-sanity", 900, movielens},
      {"ablation-audit", 0, ablation_audit},
      {"ranking-algebra", 0, ranking_algebra},
      {"end-to-end-determinism", 0, end_to_end_determinism},
  };
  std::size_t failed = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = c.run();
    } catch (const std::exception& e) {
      outcome.pass = false;
      outcome.detail = std::string("error: ") + e.what();
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.budget_seconds > 0 && seconds >= c.budget_seconds) {
      outcome.pass = false;
      outcome.detail += "; over the " + fmt(c.budget_seconds, 4) + " s budget";
    }
    if (!outcome.pass) ++failed;
    std::printf("%s %-24s %7.1fs  %s\n", outcome.pass ? "PASS" : "FAIL", c.name.c_str(), seconds,
                outcome.detail.c_str());
    for (const auto& line : outcome.info) std::printf("     %-24s           %s\n", "", line.c_str());
    std::fflush(stdout);
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
