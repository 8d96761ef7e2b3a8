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

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include <algorithm>
#include <cmath>

#include "seqrec/baselines.hpp"
#include "seqrec/error.hpp"
#include "seqrec/random.hpp"
#include "seqrec/text.hpp"

namespace seqrec {
namespace {

constexpr double kDivergenceThreshold = 1e6;

struct Entry {
  std::size_t user;
  Token item;
  double value;
};

double observed_mse(const std::vector<Entry>& entries, const LatentFactors& f) {
  double total = 0.0;
  for (const auto& e : entries) {
    const double err = e.value - nn::dot(f.item_factors.row(static_cast<std::size_t>(e.item)),
                                         f.user_factors.row(e.user));
    total += err * err;
  }
  return total / static_cast<double>(entries.size());
}

}  // namespace

std::optional<std::size_t> LatentFactors::user_index(std::string_view user_id) const {
  const auto it = std::find(users.begin(), users.end(), user_id);
  if (it == users.end()) return std::nullopt;
  return static_cast<std::size_t>(it - users.begin());
}

MfTrainResult mf_train(const InteractionMatrix& matrix, const MfConfig& config) {
  if (config.k == 0) throw Error("bad_config", "mf latent dimension k must be at least 1");
  if (matrix.nonzeros() == 0) throw Error("empty_matrix", "mf needs at least one observed entry");

  std::vector<Entry> entries;
  entries.reserve(matrix.nonzeros());
  std::vector<std::uint8_t> seen(matrix.vocab_size(), 0);
  for (std::size_t u = 0; u < matrix.user_count(); ++u) {
    for (const auto& [item, value] : matrix.row(u)) {
      entries.push_back({u, item, value});
      seen[static_cast<std::size_t>(item)] = 1;
    }
  }
  const auto items_with_entries =
      static_cast<std::size_t>(std::count(seen.begin(), seen.end(), std::uint8_t{1}));
  if (config.k > std::min(matrix.user_count(), items_with_entries)) {
    throw Error("bad_config", "mf latent dimension k=" + std::to_string(config.k) +
                                  " exceeds min(|U|, |I|) = " +
                                  std::to_string(std::min(matrix.user_count(),
                                                          items_with_entries)));
  }

  MfTrainResult result;
  LatentFactors& f = result.factors;
  f.item_factors = nn::Matrix(matrix.vocab_size(), config.k);
  f.user_factors = nn::Matrix(matrix.user_count(), config.k);
  f.item_seen = std::move(seen);
  f.regularization = config.regularization;
  for (std::size_t u = 0; u < matrix.user_count(); ++u) f.users.push_back(matrix.user_id(u));

  Rng rng(config.seed);
  for (double& v : f.user_factors.values()) v = rng.uniform(-config.init_scale, config.init_scale);
  for (double& v : f.item_factors.values()) v = rng.uniform(-config.init_scale, config.init_scale);

  const double lr = config.learning_rate;
  const double lambda = config.regularization;
  std::vector<double> p_old(config.k);
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(entries);
    for (const auto& e : entries) {
      auto p = f.user_factors.row(e.user);
      auto q = f.item_factors.row(static_cast<std::size_t>(e.item));
      const double err = e.value - nn::dot(q, p);
      std::copy(p.begin(), p.end(), p_old.begin());
      for (std::size_t d = 0; d < config.k; ++d) {
        p[d] += lr * (err * q[d] - lambda * p[d]);
        q[d] += lr * (err * p_old[d] - lambda * q[d]);
      }
    }
    const double mse = observed_mse(entries, f);
    if (!std::isfinite(mse) || mse > kDivergenceThreshold) {
      throw Error("diverged", "matrix factorization diverged in epoch " +
                                  std::to_string(epoch + 1) + " (mse " + format_double(mse) +
                                  "); retry with a smaller learning rate than " +
                                  format_double(lr));
    }
    result.epoch_mse.push_back(mse);
  }
  return result;
}

Estimate mf_predict(const LatentFactors& factors, std::size_t user, Token item) {
  const auto token = static_cast<std::size_t>(item);
  if (user >= factors.user_factors.rows() || item < 0 || token >= factors.item_factors.rows() ||
      !factors.item_seen[token]) {
    return {0.0, false};
  }
  return {nn::dot(factors.item_factors.row(token), factors.user_factors.row(user)), true};
}

std::optional<std::vector<double>> fold_in_user(const LatentFactors& factors,
                                                const InteractionRow& row) {
  const std::size_t k = factors.k();
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(k),
                                               static_cast<Eigen::Index>(k));
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(k));
  std::size_t used = 0;
  for (const auto& [item, value] : row) {
    const auto token = static_cast<std::size_t>(item);
    if (token >= factors.item_factors.rows() || !factors.item_seen[token]) continue;
    const Eigen::Map<const Eigen::VectorXd> q(factors.item_factors.row(token).data(),
                                              static_cast<Eigen::Index>(k));
    gram.noalias() += q * q.transpose();
    rhs.noalias() += value * q;
    ++used;
  }
  if (used == 0) return std::nullopt;
  const double ridge = std::max(factors.regularization, 1e-9) * static_cast<double>(used);
  gram.diagonal().array() += ridge;
  const Eigen::VectorXd p = gram.ldlt().solve(rhs);
  return std::vector<double>(p.data(), p.data() + p.size());
}

nn::Checkpoint mf_to_checkpoint(const MfTrainResult& result, const MfConfig& config,
                                std::string vocabulary_hash) {
  const LatentFactors& f = result.factors;
  nn::Checkpoint checkpoint;
  checkpoint.kind = "matrix_factorization";
  checkpoint.vocabulary_hash = std::move(vocabulary_hash);
  checkpoint.meta = {{"k", config.k},
                     {"learning_rate", config.learning_rate},
                     {"regularization", config.regularization},
                     {"epochs", config.epochs},
                     {"init_scale", config.init_scale},
                     {"seed", config.seed},
                     {"users", f.users},
                     {"epoch_mse", result.epoch_mse}};
  nn::Matrix seen(f.item_seen.size(), 1);
  for (std::size_t i = 0; i < f.item_seen.size(); ++i) seen(i, 0) = f.item_seen[i];
  checkpoint.tensors.emplace_back("item_factors", f.item_factors);
  checkpoint.tensors.emplace_back("user_factors", f.user_factors);
  checkpoint.tensors.emplace_back("item_seen", std::move(seen));
  return checkpoint;
}

LatentFactors mf_from_checkpoint(const nn::Checkpoint& checkpoint) {
  LatentFactors f;
  f.item_factors = checkpoint.tensor("item_factors");
  f.user_factors = checkpoint.tensor("user_factors");
  f.users = checkpoint.meta.at("users").get<std::vector<std::string>>();
  f.regularization = checkpoint.meta.at("regularization").get<double>();
  const nn::Matrix& seen = checkpoint.tensor("item_seen");
  for (double v : seen.values()) f.item_seen.push_back(v != 0.0 ? 1 : 0);
  if (f.users.size() != f.user_factors.rows() || f.item_seen.size() != f.item_factors.rows()) {
    throw Error("bad_checkpoint", "matrix factorization checkpoint is inconsistent");
  }
  return f;
}

}  // namespace seqrec
