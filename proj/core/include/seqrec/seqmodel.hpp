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

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "seqrec/ingest.hpp"
#include "seqrec/nn/checkpoint.hpp"
#include "seqrec/nn/layers.hpp"

namespace seqrec {

struct ModelConfig {
  std::size_t embedding_dim = 32;
  std::size_t hidden_dim = 64;
  // Widths of the four rectified hidden layers; a fifth affine layer of width
  // |I'| with logistic output closes the head.
  std::vector<std::size_t> hidden_widths = {64, 64, 48, 32};
  double learning_rate = 0.05;
  double momentum = 0.0;
  std::size_t batch_size = 32;
  std::size_t epochs = 20;
  double clip_norm = 5.0;
  double forget_bias = 1.0;
  nn::LossMode loss = nn::LossMode::kBinaryCrossEntropy;
  std::uint64_t seed = 0;

  // Every violated constraint, empty when valid.
  std::vector<std::string> violations() const;
};

std::string_view to_string(nn::LossMode mode);
nn::LossMode parse_loss_mode(std::string_view name);

// Embedding -> two stacked LSTM layers -> five affine layers -> logistic.
// Sequences are rolled out to their true length; the last hidden state of the
// second layer feeds the head.
class SequenceModel {
 public:
  // Throws seqrec::Error("bad_config") listing every violated constraint.
  SequenceModel(std::size_t vocab_size, std::size_t output_size, ModelConfig config,
                std::string vocabulary_hash);

  static SequenceModel from_checkpoint(const nn::Checkpoint& checkpoint);
  nn::Checkpoint to_checkpoint() const;

  // Interaction probabilities over I', each in (0, 1).
  std::vector<double> forward(std::span<const Token> tokens) const;

  // Adds scale * dLoss/dtheta to the parameter gradients and returns the
  // unscaled loss for this user.
  double accumulate_gradient(std::span<const Token> tokens, std::span<const double> target,
                             double scale);

  double loss(std::span<const Token> tokens, std::span<const double> target) const;

  nn::ParameterSet& parameters() { return params_; }
  const nn::ParameterSet& parameters() const { return params_; }
  const ModelConfig& config() const { return config_; }
  std::size_t vocab_size() const { return vocab_size_; }
  std::size_t output_size() const { return output_size_; }
  const std::string& vocabulary_hash() const { return vocabulary_hash_; }

  // Throws seqrec::Error("vocabulary_mismatch").
  void require_vocabulary(std::string_view vocabulary_hash) const;

 private:
  struct Trace;

  void build();
  void initialize();
  std::vector<double> run(std::span<const Token> tokens, Trace* trace) const;

  std::size_t vocab_size_;
  std::size_t output_size_;
  ModelConfig config_;
  std::string vocabulary_hash_;
  nn::ParameterSet params_;
  std::size_t embedding_ = 0;
  nn::LstmCell cell1_;
  nn::LstmCell cell2_;
  std::vector<nn::AffineLayer> head_;
};

struct EpochRecord {
  std::size_t epoch = 0;  // 0 is the untrained model
  double train_loss = 0.0;
  double validation_loss = 0.0;
  double seconds = 0.0;
  std::size_t steps = 0;
};

struct TrainReport {
  std::vector<EpochRecord> epochs;
  std::size_t best_epoch = 0;
  std::size_t total_steps = 0;
  std::vector<std::pair<std::string, double>> parameter_norms;
};

// epoch,train_loss,val_loss,seconds
std::string format_train_report_csv(const TrainReport& report);

struct TrainingSet {
  const SequenceMap& sequences;
  const TargetMap& targets;
  std::span<const std::string> train_users;
  std::span<const std::string> validation_users;
};

// Mini-batch SGD over train users in seeded shuffled order. The parameters of
// the epoch with the lowest validation loss are restored at the end (the last
// epoch when there are no validation users).
TrainReport train(SequenceModel& model, const TrainingSet& data);

// Mean per-user loss over `users`.
double mean_loss(const SequenceModel& model, const TrainingSet& data,
                 std::span<const std::string> users);

// Per-user forward; the result does not depend on batch composition.
std::map<std::string, std::vector<double>> predict_batch(const SequenceModel& model,
                                                         std::span<const UserSequence> users);

}  // namespace seqrec
