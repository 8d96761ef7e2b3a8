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

#include "seqrec/seqmodel.hpp"

#include <chrono>
#include <cmath>
#include <sstream>

#include "seqrec/error.hpp"
#include "seqrec/random.hpp"
#include "seqrec/text.hpp"

namespace seqrec {
namespace {

constexpr std::size_t kHeadHiddenLayers = 4;
// Shuffling draws from its own stream so that changing the initialisation
// does not perturb the visiting order.
constexpr std::uint64_t kShuffleStream = 0x9E3779B97F4A7C15ULL;

std::vector<double> to_doubles(const std::vector<std::uint8_t>& y) {
  return {y.begin(), y.end()};
}

const TargetVector& target_of(const TargetMap& targets, const std::string& user) {
  const auto it = targets.find(user);
  if (it == targets.end()) throw Error("missing_target", "no target vector for user " + user);
  return it->second;
}

const UserSequence& sequence_of(const SequenceMap& sequences, const std::string& user) {
  const auto it = sequences.find(user);
  if (it == sequences.end()) throw Error("missing_sequence", "no sequence for user " + user);
  return it->second;
}

}  // namespace

std::vector<std::string> ModelConfig::violations() const {
  std::vector<std::string> out;
  if (embedding_dim == 0) out.emplace_back("embedding_dim must be positive");
  if (hidden_dim == 0) out.emplace_back("hidden_dim must be positive");
  if (hidden_widths.size() != kHeadHiddenLayers) {
    out.emplace_back("hidden_widths must list exactly 4 widths (five affine layers in total)");
  }
  for (std::size_t w : hidden_widths) {
    if (w == 0) {
      out.emplace_back("hidden_widths must all be positive");
      break;
    }
  }
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    out.emplace_back("learning_rate must be finite and non-negative");
  }
  if (!(momentum >= 0.0 && momentum < 1.0)) out.emplace_back("momentum must lie in [0, 1)");
  if (batch_size == 0) out.emplace_back("batch_size must be positive");
  if (!(clip_norm >= 0.0)) out.emplace_back("clip_norm must be non-negative (0 disables)");
  return out;
}

std::string_view to_string(nn::LossMode mode) {
  return mode == nn::LossMode::kBinaryCrossEntropy ? "bce" : "positives_only";
}

nn::LossMode parse_loss_mode(std::string_view name) {
  if (name == "bce") return nn::LossMode::kBinaryCrossEntropy;
  if (name == "positives_only") return nn::LossMode::kPositivesOnly;
  throw Error("bad_config", "loss must be 'bce' or 'positives_only', got '" + std::string(name) +
                                "'");
}

// Everything the backward pass needs from one forward rollout.
struct SequenceModel::Trace {
  std::vector<nn::LstmStepCache> layer1;
  std::vector<nn::LstmStepCache> layer2;
  std::vector<std::vector<double>> head_inputs;  // input to each affine layer
  std::vector<std::vector<double>> head_pre;     // pre-activation of each affine layer
  std::vector<double> probabilities;
};

SequenceModel::SequenceModel(std::size_t vocab_size, std::size_t output_size, ModelConfig config,
                             std::string vocabulary_hash)
    : vocab_size_(vocab_size),
      output_size_(output_size),
      config_(std::move(config)),
      vocabulary_hash_(std::move(vocabulary_hash)) {
  std::vector<std::string> problems = config_.violations();
  if (vocab_size_ < 3) {
    problems.emplace_back("vocabulary must hold PAD, UNK and at least one item (|V| >= 3)");
  }
  if (output_size_ == 0) problems.emplace_back("output width |I'| must be positive");
  if (!problems.empty()) {
    std::string message = "invalid sequence model configuration:";
    for (const auto& p : problems) message += " [" + p + "]";
    throw Error("bad_config", message);
  }
  build();
  initialize();
}

void SequenceModel::build() {
  embedding_ = params_.add("embedding", vocab_size_, config_.embedding_dim);
  cell1_ = nn::LstmCell::create(params_, "lstm1", config_.embedding_dim, config_.hidden_dim);
  cell2_ = nn::LstmCell::create(params_, "lstm2", config_.hidden_dim, config_.hidden_dim);
  std::size_t width = config_.hidden_dim;
  for (std::size_t layer = 0; layer <= kHeadHiddenLayers; ++layer) {
    const std::size_t out =
        layer < kHeadHiddenLayers ? config_.hidden_widths[layer] : output_size_;
    head_.push_back(
        nn::AffineLayer::create(params_, "head." + std::to_string(layer), width, out));
    width = out;
  }
}

void SequenceModel::initialize() {
  Rng rng(config_.seed);
  nn::init_glorot_uniform(params_[embedding_].value, vocab_size_, config_.embedding_dim, rng);
  cell1_.initialize(params_, rng, config_.forget_bias);
  cell2_.initialize(params_, rng, config_.forget_bias);
  for (const auto& layer : head_) layer.initialize(params_, rng);
}

std::vector<double> SequenceModel::run(std::span<const Token> tokens, Trace* trace) const {
  if (tokens.empty()) throw Error("empty_sequence", "cannot score an empty sequence");
  const nn::Matrix embedded = nn::embed(tokens, params_[embedding_].value);

  const auto w1 = cell1_.weights(params_);
  const auto w2 = cell2_.weights(params_);
  auto state1 = nn::LstmState::zeros(config_.hidden_dim);
  auto state2 = nn::LstmState::zeros(config_.hidden_dim);
  if (trace != nullptr) {
    trace->layer1.resize(tokens.size());
    trace->layer2.resize(tokens.size());
  }
  for (std::size_t t = 0; t < tokens.size(); ++t) {
    state1 = nn::lstm_step(embedded.row(t), state1, w1, trace ? &trace->layer1[t] : nullptr);
    state2 = nn::lstm_step(state1.h, state2, w2, trace ? &trace->layer2[t] : nullptr);
  }

  std::vector<double> activation = std::move(state2.h);
  for (std::size_t layer = 0; layer < head_.size(); ++layer) {
    const auto& affine = head_[layer];
    std::vector<double> pre =
        nn::affine(activation, params_[affine.weight].value, params_[affine.bias].value);
    std::vector<double> next =
        layer + 1 < head_.size() ? nn::relu(pre) : nn::sigmoid(pre);
    if (trace != nullptr) {
      trace->head_inputs.push_back(std::move(activation));
      trace->head_pre.push_back(std::move(pre));
    }
    activation = std::move(next);
  }
  if (trace != nullptr) trace->probabilities = activation;
  return activation;
}

std::vector<double> SequenceModel::forward(std::span<const Token> tokens) const {
  return run(tokens, nullptr);
}

double SequenceModel::loss(std::span<const Token> tokens, std::span<const double> target) const {
  return nn::bce_loss(forward(tokens), target, config_.loss).loss;
}

double SequenceModel::accumulate_gradient(std::span<const Token> tokens,
                                          std::span<const double> target, double scale) {
  nn::require_shape(target.size() == output_size_, "target width");
  Trace trace;
  run(tokens, &trace);
  nn::LossValue value = nn::bce_loss(trace.probabilities, target, config_.loss);
  for (double& g : value.grad) g *= scale;

  // Head, last layer first.
  std::vector<double> grad = nn::sigmoid_backward(trace.probabilities, value.grad);
  for (std::size_t layer = head_.size(); layer-- > 0;) {
    const auto& affine = head_[layer];
    if (layer + 1 < head_.size()) grad = nn::relu_backward(trace.head_pre[layer], grad);
    std::vector<double> dx(affine.input_dim);
    nn::affine_backward(trace.head_inputs[layer], grad, params_[affine.weight].value,
                        params_[affine.weight].grad, params_[affine.bias].grad, dx);
    grad = std::move(dx);
  }

  // Recurrent layers through time. Only the final top-layer state feeds the
  // head; every step of the lower layer feeds the upper one.
  const std::size_t n = tokens.size();
  const std::size_t hidden = config_.hidden_dim;
  const auto w1 = cell1_.weights(params_);
  const auto w2 = cell2_.weights(params_);
  const auto g1 = cell1_.grads(params_);
  const auto g2 = cell2_.grads(params_);

  std::vector<std::vector<double>> d_layer1_out(n, std::vector<double>(hidden, 0.0));
  nn::LstmState carry{std::move(grad), std::vector<double>(hidden, 0.0)};
  for (std::size_t t = n; t-- > 0;) {
    nn::LstmState prev;
    nn::lstm_step_backward(trace.layer2[t], w2, carry.h, carry.c, g2, d_layer1_out[t], prev);
    carry = std::move(prev);
  }

  nn::Matrix d_embedded(n, config_.embedding_dim);
  carry = nn::LstmState::zeros(hidden);
  for (std::size_t t = n; t-- > 0;) {
    for (std::size_t k = 0; k < hidden; ++k) carry.h[k] += d_layer1_out[t][k];
    nn::LstmState prev;
    nn::lstm_step_backward(trace.layer1[t], w1, carry.h, carry.c, g1, d_embedded.row(t), prev);
    carry = std::move(prev);
  }
  nn::embed_backward(tokens, d_embedded, params_[embedding_].grad);
  return value.loss;
}

void SequenceModel::require_vocabulary(std::string_view vocabulary_hash) const {
  if (vocabulary_hash != vocabulary_hash_) {
    throw Error("vocabulary_mismatch", "sequence model was trained against vocabulary " +
                                           vocabulary_hash_.substr(0, 12) + ", got " +
                                           std::string(vocabulary_hash.substr(0, 12)));
  }
}

nn::Checkpoint SequenceModel::to_checkpoint() const {
  nn::Checkpoint checkpoint;
  checkpoint.kind = "sequence_model";
  checkpoint.vocabulary_hash = vocabulary_hash_;
  checkpoint.meta = {
      {"vocab_size", vocab_size_},
      {"output_size", output_size_},
      {"embedding_dim", config_.embedding_dim},
      {"hidden_dim", config_.hidden_dim},
      {"hidden_widths", config_.hidden_widths},
      {"learning_rate", config_.learning_rate},
      {"momentum", config_.momentum},
      {"batch_size", config_.batch_size},
      {"epochs", config_.epochs},
      {"clip_norm", config_.clip_norm},
      {"forget_bias", config_.forget_bias},
      {"loss", std::string(to_string(config_.loss))},
      {"seed", config_.seed},
  };
  for (const auto& p : params_) checkpoint.tensors.emplace_back(p.name, p.value);
  return checkpoint;
}

SequenceModel SequenceModel::from_checkpoint(const nn::Checkpoint& checkpoint) {
  if (checkpoint.kind != "sequence_model") {
    throw Error("bad_checkpoint", "expected a sequence_model checkpoint, got " + checkpoint.kind);
  }
  const auto& meta = checkpoint.meta;
  ModelConfig config;
  try {
    config.embedding_dim = meta.at("embedding_dim").get<std::size_t>();
    config.hidden_dim = meta.at("hidden_dim").get<std::size_t>();
    config.hidden_widths = meta.at("hidden_widths").get<std::vector<std::size_t>>();
    config.learning_rate = meta.at("learning_rate").get<double>();
    config.momentum = meta.at("momentum").get<double>();
    config.batch_size = meta.at("batch_size").get<std::size_t>();
    config.epochs = meta.at("epochs").get<std::size_t>();
    config.clip_norm = meta.at("clip_norm").get<double>();
    config.forget_bias = meta.at("forget_bias").get<double>();
    config.loss = parse_loss_mode(meta.at("loss").get<std::string>());
    config.seed = meta.at("seed").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw Error("bad_checkpoint", std::string("sequence model metadata: ") + e.what());
  }
  SequenceModel model(meta.at("vocab_size").get<std::size_t>(),
                      meta.at("output_size").get<std::size_t>(), config,
                      checkpoint.vocabulary_hash);
  for (auto& p : model.params_) {
    const nn::Matrix& stored = checkpoint.tensor(p.name);
    if (!stored.same_shape(p.value)) {
      throw Error("bad_checkpoint", "tensor '" + p.name + "' has the wrong shape");
    }
    p.value = stored;
  }
  return model;
}

// --- Training ----------------------------------------------------------------

double mean_loss(const SequenceModel& model, const TrainingSet& data,
                 std::span<const std::string> users) {
  if (users.empty()) return 0.0;
  double total = 0.0;
  for (const auto& user : users) {
    const auto target = to_doubles(target_of(data.targets, user).y);
    total += model.loss(sequence_of(data.sequences, user).tokens, target);
  }
  return total / static_cast<double>(users.size());
}

TrainReport train(SequenceModel& model, const TrainingSet& data) {
  using Clock = std::chrono::steady_clock;
  const ModelConfig& config = model.config();
  for (const auto& user : data.train_users) {
    sequence_of(data.sequences, user);
    if (target_of(data.targets, user).y.size() != model.output_size()) {
      throw Error("shape_mismatch", "target width for user " + user + " differs from |I'|");
    }
  }

  TrainReport report;
  const bool has_validation = !data.validation_users.empty();
  {
    const auto start = Clock::now();
    EpochRecord initial;
    initial.train_loss = mean_loss(model, data, data.train_users);
    initial.validation_loss =
        has_validation ? mean_loss(model, data, data.validation_users) : initial.train_loss;
    initial.seconds = std::chrono::duration<double>(Clock::now() - start).count();
    report.epochs.push_back(initial);
  }

  nn::ParameterSet best = model.parameters();
  double best_loss = report.epochs.front().validation_loss;
  nn::Sgd optimizer(config.learning_rate, config.momentum);
  Rng shuffle_rng(config.seed ^ kShuffleStream);
  std::vector<std::string> order(data.train_users.begin(), data.train_users.end());

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    const auto start = Clock::now();
    shuffle_rng.shuffle(order);
    double epoch_loss = 0.0;
    std::size_t steps = 0;
    for (std::size_t begin = 0; begin < order.size(); begin += config.batch_size) {
      const std::size_t end = std::min(order.size(), begin + config.batch_size);
      const double scale = 1.0 / static_cast<double>(end - begin);
      double batch_loss = 0.0;
      for (std::size_t i = begin; i < end; ++i) {
        const auto target = to_doubles(target_of(data.targets, order[i]).y);
        batch_loss += model.accumulate_gradient(sequence_of(data.sequences, order[i]).tokens,
                                                target, scale);
      }
      if (!std::isfinite(batch_loss)) {
        std::ostringstream users;
        for (std::size_t i = begin; i < end; ++i) users << (i > begin ? "," : "") << order[i];
        throw Error("non_finite_loss", "non-finite loss in epoch " + std::to_string(epoch) +
                                           " batch " +
                                           std::to_string(begin / config.batch_size) +
                                           " (users " + users.str() + ")");
      }
      model.parameters().clip_grad_norm(config.clip_norm);
      optimizer.step(model.parameters());
      epoch_loss += batch_loss;
      ++steps;
    }
    EpochRecord record;
    record.epoch = epoch;
    record.steps = steps;
    record.train_loss = order.empty() ? 0.0 : epoch_loss / static_cast<double>(order.size());
    record.validation_loss =
        has_validation ? mean_loss(model, data, data.validation_users) : record.train_loss;
    record.seconds = std::chrono::duration<double>(Clock::now() - start).count();
    report.total_steps += steps;
    report.epochs.push_back(record);

    if (!has_validation || record.validation_loss < best_loss) {
      best_loss = record.validation_loss;
      report.best_epoch = epoch;
      best.assign_values(model.parameters());
    }
  }
  model.parameters().assign_values(best);
  for (const auto& p : model.parameters()) {
    report.parameter_norms.emplace_back(p.name, std::sqrt(p.value.squared_norm()));
  }
  return report;
}

std::string format_train_report_csv(const TrainReport& report) {
  std::string out = "epoch,train_loss,val_loss,seconds\n";
  for (const auto& e : report.epochs) {
    out += std::to_string(e.epoch) + "," + format_double(e.train_loss) + "," +
           format_double(e.validation_loss) + "," + format_double(e.seconds) + "\n";
  }
  return out;
}

std::map<std::string, std::vector<double>> predict_batch(const SequenceModel& model,
                                                         std::span<const UserSequence> users) {
  std::map<std::string, std::vector<double>> out;
  for (const auto& user : users) out.emplace(user.user_id, model.forward(user.tokens));
  return out;
}

}  // namespace seqrec
