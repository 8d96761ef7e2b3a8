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
#include <cmath>

#include "seqrec/baselines.hpp"
#include "seqrec/error.hpp"

namespace seqrec {
namespace {

double column_norm(const InteractionMatrix& matrix, Token item) {
  double total = 0.0;
  for (const auto& [user, value] : matrix.column(item)) total += value * value;
  return std::sqrt(total);
}

bool more_similar(const Neighbor& a, const Neighbor& b) {
  if (a.similarity != b.similarity) return a.similarity > b.similarity;
  return a.item < b.item;
}

// Positive-similarity neighbours of every item, most similar first.
std::vector<std::vector<Neighbor>> rank_neighbors(const InteractionMatrix& matrix,
                                                  std::size_t neighborhood) {
  const std::size_t n = matrix.vocab_size();
  std::vector<double> norms(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) norms[i] = column_norm(matrix, static_cast<Token>(i));

  std::vector<std::vector<Neighbor>> neighbors(n);
  std::vector<double> dots(n, 0.0);
  std::vector<Token> touched;
  for (std::size_t i = 0; i < n; ++i) {
    if (norms[i] == 0.0) continue;
    touched.clear();
    for (const auto& [user, value] : matrix.column(static_cast<Token>(i))) {
      for (const auto& [item, other] : matrix.row(user)) {
        if (static_cast<std::size_t>(item) == i) continue;
        if (dots[static_cast<std::size_t>(item)] == 0.0) touched.push_back(item);
        dots[static_cast<std::size_t>(item)] += value * other;
      }
    }
    auto& list = neighbors[i];
    for (Token j : touched) {
      const auto jj = static_cast<std::size_t>(j);
      const double similarity = dots[jj] / (norms[i] * norms[jj]);
      if (similarity > 0.0) list.push_back({j, std::min(similarity, 1.0)});
      dots[jj] = 0.0;
    }
    if (list.size() > neighborhood) {
      std::partial_sort(list.begin(), list.begin() + static_cast<std::ptrdiff_t>(neighborhood),
                        list.end(), more_similar);
      list.resize(neighborhood);
    } else {
      std::sort(list.begin(), list.end(), more_similar);
    }
  }
  return neighbors;
}

Estimate weighted_average(std::span<const Neighbor> neighbors, const InteractionRow& row) {
  double numerator = 0.0;
  double weight = 0.0;
  for (const auto& neighbor : neighbors) {
    const auto it =
        std::lower_bound(row.begin(), row.end(), std::make_pair(neighbor.item, 0.0),
                         [](const auto& a, const auto& b) { return a.first < b.first; });
    const double r = it != row.end() && it->first == neighbor.item ? it->second : 0.0;
    numerator += r * neighbor.similarity;
    weight += neighbor.similarity;
  }
  if (weight <= 0.0) return {0.0, false};
  return {numerator / weight, true};
}

}  // namespace

double item_similarity(const InteractionMatrix& matrix, Token i, Token j) {
  const auto& a = matrix.column(i);
  const auto& b = matrix.column(j);
  if (a.empty() || b.empty()) return 0.0;
  double dot = 0.0;
  std::size_t x = 0;
  std::size_t y = 0;
  while (x < a.size() && y < b.size()) {
    if (a[x].first < b[y].first) {
      ++x;
    } else if (b[y].first < a[x].first) {
      ++y;
    } else {
      dot += a[x++].second * b[y++].second;
    }
  }
  const double norms = column_norm(matrix, i) * column_norm(matrix, j);
  if (norms == 0.0) return 0.0;
  return std::clamp(dot / norms, -1.0, 1.0);
}

ItemKnn ItemKnn::fit(const InteractionMatrix& matrix, std::size_t neighborhood,
                     InteractionMode mode) {
  if (neighborhood == 0) throw Error("bad_config", "cf neighborhood must be at least 1");
  ItemKnn knn;
  knn.neighborhood_ = neighborhood;
  knn.mode_ = mode;
  knn.neighbors_ = rank_neighbors(matrix, neighborhood);
  return knn;
}

Estimate ItemKnn::predict(const InteractionRow& row, Token item) const {
  return weighted_average(neighbors(item), row);
}

Estimate cf_predict(const InteractionMatrix& matrix, std::size_t user, Token item,
                    std::size_t neighborhood) {
  if (neighborhood == 0) throw Error("bad_config", "cf neighborhood must be at least 1");
  std::vector<Neighbor> candidates;
  for (std::size_t j = 0; j < matrix.vocab_size(); ++j) {
    if (static_cast<Token>(j) == item) continue;
    const double similarity = item_similarity(matrix, item, static_cast<Token>(j));
    if (similarity > 0.0) candidates.push_back({static_cast<Token>(j), similarity});
  }
  std::sort(candidates.begin(), candidates.end(), more_similar);
  if (candidates.size() > neighborhood) candidates.resize(neighborhood);
  return weighted_average(candidates, matrix.row(user));
}

nn::Checkpoint ItemKnn::to_checkpoint(std::string vocabulary_hash) const {
  std::size_t entries = 0;
  for (const auto& list : neighbors_) entries += list.size();
  // One row per (item, neighbour, similarity) triple.
  nn::Matrix table(entries, 3);
  std::size_t r = 0;
  for (std::size_t i = 0; i < neighbors_.size(); ++i) {
    for (const auto& neighbor : neighbors_[i]) {
      table(r, 0) = static_cast<double>(i);
      table(r, 1) = static_cast<double>(neighbor.item);
      table(r, 2) = neighbor.similarity;
      ++r;
    }
  }
  nn::Checkpoint checkpoint;
  checkpoint.kind = "item_knn";
  checkpoint.vocabulary_hash = std::move(vocabulary_hash);
  checkpoint.meta = {{"vocab_size", neighbors_.size()},
                     {"neighborhood", neighborhood_},
                     {"mode", std::string(to_string(mode_))}};
  checkpoint.tensors.emplace_back("neighbors", std::move(table));
  return checkpoint;
}

ItemKnn ItemKnn::from_checkpoint(const nn::Checkpoint& checkpoint) {
  ItemKnn knn;
  knn.neighborhood_ = checkpoint.meta.at("neighborhood").get<std::size_t>();
  knn.mode_ = parse_interaction_mode(checkpoint.meta.at("mode").get<std::string>());
  knn.neighbors_.resize(checkpoint.meta.at("vocab_size").get<std::size_t>());
  const nn::Matrix& table = checkpoint.tensor("neighbors");
  for (std::size_t r = 0; r < table.rows(); ++r) {
    const auto item = static_cast<std::size_t>(table(r, 0));
    if (item >= knn.neighbors_.size()) throw Error("bad_checkpoint", "neighbor item out of range");
    knn.neighbors_[item].push_back({static_cast<Token>(table(r, 1)), table(r, 2)});
  }
  return knn;
}

}  // namespace seqrec
