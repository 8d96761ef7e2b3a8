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

#include <numeric>
#include <string>
#include <vector>

#include <benchmark/benchmark.h>

#include "seqrec/baselines.hpp"
#include "seqrec/metrics.hpp"
#include "seqrec/nn/layers.hpp"
#include "seqrec/random.hpp"
#include "seqrec/ranking.hpp"
#include "seqrec/seqmodel.hpp"

namespace seqrec {
namespace {

void BM_LstmStepForward(benchmark::State& state) {
  const auto hidden = static_cast<std::size_t>(state.range(0));
  nn::ParameterSet params;
  const auto cell = nn::LstmCell::create(params, "lstm", 32, hidden);
  Rng rng(1);
  cell.initialize(params, rng, 1.0);
  const std::vector<double> x(32, 0.1);
  nn::LstmState s = nn::LstmState::zeros(hidden);
  for (auto _ : state) {
    s = nn::lstm_step(x, s, cell.weights(params));
    benchmark::DoNotOptimize(s.h.data());
  }
}
BENCHMARK(BM_LstmStepForward)->Arg(32)->Arg(64)->Arg(128);

void BM_LstmStepBackward(benchmark::State& state) {
  const auto hidden = static_cast<std::size_t>(state.range(0));
  nn::ParameterSet params;
  const auto cell = nn::LstmCell::create(params, "lstm", 32, hidden);
  Rng rng(1);
  cell.initialize(params, rng, 1.0);
  const std::vector<double> x(32, 0.1);
  nn::LstmStepCache cache;
  nn::lstm_step(x, nn::LstmState::zeros(hidden), cell.weights(params), &cache);
  const std::vector<double> dh(hidden, 0.01), dc(hidden, 0.0);
  std::vector<double> dx(32);
  nn::LstmState d_prev = nn::LstmState::zeros(hidden);
  for (auto _ : state) {
    nn::lstm_step_backward(cache, cell.weights(params), dh, dc, cell.grads(params), dx, d_prev);
    benchmark::DoNotOptimize(dx.data());
  }
}
BENCHMARK(BM_LstmStepBackward)->Arg(32)->Arg(64)->Arg(128);

void BM_SequenceModelForward(benchmark::State& state) {
  const auto length = static_cast<std::size_t>(state.range(0));
  ModelConfig config;
  config.seed = 3;
  const SequenceModel model(1002, 1000, config, "bench");
  Rng rng(2);
  std::vector<Token> tokens(length);
  for (auto& t : tokens) t = static_cast<Token>(2 + rng.below(1000));
  for (auto _ : state) benchmark::DoNotOptimize(model.forward(tokens));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(length));
}
BENCHMARK(BM_SequenceModelForward)->Arg(16)->Arg(128);

void BM_SequenceModelGradient(benchmark::State& state) {
  const auto length = static_cast<std::size_t>(state.range(0));
  ModelConfig config;
  config.seed = 3;
  SequenceModel model(1002, 1000, config, "bench");
  Rng rng(2);
  std::vector<Token> tokens(length);
  for (auto& t : tokens) t = static_cast<Token>(2 + rng.below(1000));
  std::vector<double> target(1000, 0.0);
  target[7] = 1.0;
  for (auto _ : state) benchmark::DoNotOptimize(model.accumulate_gradient(tokens, target, 1.0));
}
BENCHMARK(BM_SequenceModelGradient)->Arg(16)->Arg(128);

void BM_Ndcg(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::vector<Token> ranked(n);
  std::iota(ranked.begin(), ranked.end(), Token{0});
  Rng rng(4);
  rng.shuffle(ranked);
  RelevantSet relevant;
  for (Token t = 0; t < static_cast<Token>(n); t += 7) relevant.insert(t);
  for (auto _ : state) {
    benchmark::DoNotOptimize(ndcg(ranked, relevant, 10));
    benchmark::DoNotOptimize(ap_at_k(ranked, relevant, 10));
  }
}
BENCHMARK(BM_Ndcg)->Arg(100)->Arg(1000);

void BM_TopK(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::vector<Token> tokens(n);
  std::iota(tokens.begin(), tokens.end(), kFirstItemToken);
  const RecommendableSet rec(tokens);
  Rng rng(5);
  std::vector<double> p(n), base(n);
  for (std::size_t i = 0; i < n; ++i) {
    p[i] = rng.uniform();
    base[i] = rng.uniform(1e-3, 1.0);
  }
  const BasePopularity popularity(base);
  for (auto _ : state) {
    const auto r = uplift(p, popularity);
    benchmark::DoNotOptimize(top_k("u", r, p, 10, rec));
  }
}
BENCHMARK(BM_TopK)->Arg(1000)->Arg(10000);

void BM_ItemKnnFit(benchmark::State& state) {
  const auto users = static_cast<std::size_t>(state.range(0));
  constexpr std::size_t kItems = 500;
  Rng rng(6);
  InteractionMatrix m(kItems + 2);
  for (std::size_t u = 0; u < users; ++u) {
    InteractionRow row;
    for (std::size_t i = 0; i < kItems; ++i) {
      if (rng.uniform() < 0.05) row.emplace_back(static_cast<Token>(2 + i), 1.0);
    }
    m.add_user("u" + std::to_string(u), row);
  }
  for (auto _ : state) benchmark::DoNotOptimize(ItemKnn::fit(m, 50, InteractionMode::kBinary));
}
BENCHMARK(BM_ItemKnnFit)->Arg(200)->Arg(1000)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace seqrec

BENCHMARK_MAIN();
