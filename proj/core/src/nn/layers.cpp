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

#include "seqrec/nn/layers.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "seqrec/error.hpp"

namespace seqrec::nn {

// --- ParameterSet ------------------------------------------------------------

std::size_t ParameterSet::add(std::string name, std::size_t rows, std::size_t cols) {
  for (const auto& p : params_) {
    if (p.name == name) throw Error("duplicate_parameter", "parameter '" + name + "' exists");
  }
  params_.push_back({std::move(name), Matrix(rows, cols), Matrix(rows, cols)});
  return params_.size() - 1;
}

const Parameter& ParameterSet::at(std::string_view name) const {
  for (const auto& p : params_) {
    if (p.name == name) return p;
  }
  throw Error("unknown_parameter", "no parameter named '" + std::string(name) + "'");
}

Parameter& ParameterSet::at(std::string_view name) {
  return const_cast<Parameter&>(std::as_const(*this).at(name));
}

std::size_t ParameterSet::scalar_count() const {
  std::size_t total = 0;
  for (const auto& p : params_) total += p.value.size();
  return total;
}

void ParameterSet::zero_grad() {
  for (auto& p : params_) p.grad.fill(0.0);
}

double ParameterSet::grad_norm() const {
  double total = 0.0;
  for (const auto& p : params_) total += p.grad.squared_norm();
  return std::sqrt(total);
}

double ParameterSet::clip_grad_norm(double max_norm) {
  const double norm = grad_norm();
  if (max_norm > 0.0 && norm > max_norm) {
    const double scale = max_norm / norm;
    for (auto& p : params_) {
      for (double& g : p.grad.values()) g *= scale;
    }
  }
  return norm;
}

void ParameterSet::assign_values(const ParameterSet& other) {
  require_shape(other.size() == size(), "assign_values");
  for (std::size_t i = 0; i < params_.size(); ++i) {
    require_shape(params_[i].value.same_shape(other.params_[i].value), "assign_values");
    params_[i].value = other.params_[i].value;
  }
}

void init_glorot_uniform(Matrix& m, std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  for (double& v : m.values()) v = rng.uniform(-limit, limit);
}

// --- Embedding ---------------------------------------------------------------

Matrix embed(std::span<const Token> tokens, const Matrix& table) {
  Matrix out(tokens.size(), table.cols());
  for (std::size_t t = 0; t < tokens.size(); ++t) {
    const Token token = tokens[t];
    if (token < 0 || static_cast<std::size_t>(token) >= table.rows()) {
      throw Error("token_out_of_range", "token " + std::to_string(token) +
                                            " outside embedding table of " +
                                            std::to_string(table.rows()) + " rows");
    }
    const auto src = table.row(static_cast<std::size_t>(token));
    std::copy(src.begin(), src.end(), out.row(t).begin());
  }
  return out;
}

void embed_backward(std::span<const Token> tokens, const Matrix& d_out, Matrix& table_grad) {
  require_shape(d_out.rows() == tokens.size() && d_out.cols() == table_grad.cols(), "embed");
  for (std::size_t t = 0; t < tokens.size(); ++t) {
    const auto dst = table_grad.row(static_cast<std::size_t>(tokens[t]));
    const auto src = d_out.row(t);
    for (std::size_t k = 0; k < src.size(); ++k) dst[k] += src[k];
  }
}

// --- LSTM --------------------------------------------------------------------

namespace {

void require_finite(std::span<const double> values, const char* what) {
  for (double v : values) {
    if (!std::isfinite(v)) {
      throw Error("non_finite", std::string("non-finite value in lstm ") + what);
    }
  }
}

}  // namespace

LstmState lstm_step(std::span<const double> x, const LstmState& state, const LstmWeights& weights,
                    LstmStepCache* cache) {
  const std::size_t hidden = weights.w_hidden.cols();
  require_shape(weights.w_input.rows() == 4 * hidden && weights.w_hidden.rows() == 4 * hidden &&
                    weights.bias.rows() == 4 * hidden && weights.bias.cols() == 1 &&
                    weights.w_input.cols() == x.size() && state.h.size() == hidden &&
                    state.c.size() == hidden,
                "lstm_step");

  std::vector<double> gates(weights.bias.values().begin(), weights.bias.values().end());
  gemv_accumulate(weights.w_input, x, gates);
  gemv_accumulate(weights.w_hidden, state.h, gates);
  for (std::size_t k = 0; k < 3 * hidden; ++k) gates[k] = sigmoid(gates[k]);
  for (std::size_t k = 3 * hidden; k < 4 * hidden; ++k) gates[k] = std::tanh(gates[k]);

  LstmState next{std::vector<double>(hidden), std::vector<double>(hidden)};
  std::vector<double> tanh_c(hidden);
  for (std::size_t k = 0; k < hidden; ++k) {
    const double in = gates[k];
    const double forget = gates[hidden + k];
    const double out = gates[2 * hidden + k];
    const double candidate = gates[3 * hidden + k];
    next.c[k] = forget * state.c[k] + in * candidate;
    tanh_c[k] = std::tanh(next.c[k]);
    next.h[k] = out * tanh_c[k];
  }
  require_finite(next.c, "cell state");
  require_finite(next.h, "hidden state");

  if (cache != nullptr) {
    cache->x.assign(x.begin(), x.end());
    cache->h_prev = state.h;
    cache->c_prev = state.c;
    cache->gates = std::move(gates);
    cache->c = next.c;
    cache->tanh_c = std::move(tanh_c);
  }
  return next;
}

void lstm_step_backward(const LstmStepCache& cache, const LstmWeights& weights,
                        std::span<const double> dh, std::span<const double> dc,
                        const LstmGrads& grads, std::span<double> dx, LstmState& d_prev) {
  const std::size_t hidden = cache.c.size();
  require_shape(dh.size() == hidden && dc.size() == hidden && dx.size() == cache.x.size(),
                "lstm_step_backward");
  std::vector<double> dz(4 * hidden);
  d_prev.c.assign(hidden, 0.0);
  for (std::size_t k = 0; k < hidden; ++k) {
    const double in = cache.gates[k];
    const double forget = cache.gates[hidden + k];
    const double out = cache.gates[2 * hidden + k];
    const double candidate = cache.gates[3 * hidden + k];
    const double tc = cache.tanh_c[k];
    const double dc_total = dc[k] + dh[k] * out * (1.0 - tc * tc);
    dz[k] = dc_total * candidate * in * (1.0 - in);
    dz[hidden + k] = dc_total * cache.c_prev[k] * forget * (1.0 - forget);
    dz[2 * hidden + k] = dh[k] * tc * out * (1.0 - out);
    dz[3 * hidden + k] = dc_total * in * (1.0 - candidate * candidate);
    d_prev.c[k] = dc_total * forget;
  }
  outer_accumulate(dz, cache.x, grads.w_input);
  outer_accumulate(dz, cache.h_prev, grads.w_hidden);
  for (std::size_t k = 0; k < dz.size(); ++k) grads.bias(k, 0) += dz[k];

  std::fill(dx.begin(), dx.end(), 0.0);
  gemv_transpose_accumulate(weights.w_input, dz, dx);
  d_prev.h.assign(hidden, 0.0);
  gemv_transpose_accumulate(weights.w_hidden, dz, d_prev.h);
}

LstmCell LstmCell::create(ParameterSet& params, std::string_view prefix, std::size_t input_dim,
                          std::size_t hidden_dim) {
  const std::string p(prefix);
  LstmCell cell;
  cell.input_dim = input_dim;
  cell.hidden_dim = hidden_dim;
  cell.w_input = params.add(p + ".w_input", 4 * hidden_dim, input_dim);
  cell.w_hidden = params.add(p + ".w_hidden", 4 * hidden_dim, hidden_dim);
  cell.bias = params.add(p + ".bias", 4 * hidden_dim, 1);
  return cell;
}

void LstmCell::initialize(ParameterSet& params, Rng& rng, double forget_bias) const {
  init_glorot_uniform(params[w_input].value, input_dim, 4 * hidden_dim, rng);
  init_glorot_uniform(params[w_hidden].value, hidden_dim, 4 * hidden_dim, rng);
  Matrix& b = params[bias].value;
  b.fill(0.0);
  for (std::size_t k = 0; k < hidden_dim; ++k) b(hidden_dim + k, 0) = forget_bias;
}

LstmWeights LstmCell::weights(const ParameterSet& params) const {
  return {params[w_input].value, params[w_hidden].value, params[bias].value};
}

LstmGrads LstmCell::grads(ParameterSet& params) const {
  return {params[w_input].grad, params[w_hidden].grad, params[bias].grad};
}

// --- Affine and activations ---------------------------------------------------

std::vector<double> affine(std::span<const double> x, const Matrix& w, const Matrix& b) {
  require_shape(b.rows() == w.rows() && b.cols() == 1, "affine bias");
  std::vector<double> y(b.values().begin(), b.values().end());
  gemv_accumulate(w, x, y);
  return y;
}

void affine_backward(std::span<const double> x, std::span<const double> dy, const Matrix& w,
                     Matrix& w_grad, Matrix& b_grad, std::span<double> dx) {
  require_shape(b_grad.rows() == dy.size() && dx.size() == x.size(), "affine_backward");
  outer_accumulate(dy, x, w_grad);
  for (std::size_t r = 0; r < dy.size(); ++r) b_grad(r, 0) += dy[r];
  std::fill(dx.begin(), dx.end(), 0.0);
  gemv_transpose_accumulate(w, dy, dx);
}

AffineLayer AffineLayer::create(ParameterSet& params, std::string_view prefix,
                                std::size_t input_dim, std::size_t output_dim) {
  const std::string p(prefix);
  AffineLayer layer;
  layer.input_dim = input_dim;
  layer.output_dim = output_dim;
  layer.weight = params.add(p + ".weight", output_dim, input_dim);
  layer.bias = params.add(p + ".bias", output_dim, 1);
  return layer;
}

void AffineLayer::initialize(ParameterSet& params, Rng& rng) const {
  init_glorot_uniform(params[weight].value, input_dim, output_dim, rng);
  params[bias].value.fill(0.0);
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

std::vector<double> sigmoid(std::span<const double> x) {
  std::vector<double> y(x.size());
  std::transform(x.begin(), x.end(), y.begin(), [](double v) { return sigmoid(v); });
  return y;
}

std::vector<double> sigmoid_backward(std::span<const double> y, std::span<const double> dy) {
  require_shape(y.size() == dy.size(), "sigmoid_backward");
  std::vector<double> dx(y.size());
  for (std::size_t k = 0; k < y.size(); ++k) dx[k] = dy[k] * y[k] * (1.0 - y[k]);
  return dx;
}

std::vector<double> relu(std::span<const double> x) {
  std::vector<double> y(x.size());
  std::transform(x.begin(), x.end(), y.begin(), [](double v) { return v > 0.0 ? v : 0.0; });
  return y;
}

std::vector<double> relu_backward(std::span<const double> x, std::span<const double> dy) {
  require_shape(x.size() == dy.size(), "relu_backward");
  std::vector<double> dx(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) dx[k] = x[k] > 0.0 ? dy[k] : 0.0;
  return dx;
}

// --- Loss --------------------------------------------------------------------

LossValue bce_loss(std::span<const double> probabilities, std::span<const double> targets,
                   LossMode mode) {
  require_shape(probabilities.size() == targets.size(), "bce_loss");
  LossValue out;
  out.grad.resize(probabilities.size());
  for (std::size_t k = 0; k < probabilities.size(); ++k) {
    const double p = std::clamp(probabilities[k], kProbabilityClamp, 1.0 - kProbabilityClamp);
    const double y = targets[k];
    if (mode == LossMode::kBinaryCrossEntropy) {
      out.loss -= y * std::log(p) + (1.0 - y) * std::log1p(-p);
      out.grad[k] = -y / p + (1.0 - y) / (1.0 - p);
    } else {
      out.loss -= y * std::log(p);
      out.grad[k] = -y / p;
    }
  }
  return out;
}

// --- Optimizer ---------------------------------------------------------------

void Sgd::step(ParameterSet& params) {
  for (const auto& p : params) {
    if (!p.grad.all_finite()) {
      throw Error("non_finite_gradient", "non-finite gradient in parameter '" + p.name + "'");
    }
  }
  if (momentum_ != 0.0 && velocity_.size() != params.size()) {
    velocity_.clear();
    for (const auto& p : params) velocity_.emplace_back(p.value.rows(), p.value.cols());
  }
  std::size_t index = 0;
  for (auto& p : params) {
    auto value = p.value.values();
    auto grad = p.grad.values();
    if (momentum_ != 0.0) {
      auto velocity = velocity_[index].values();
      for (std::size_t k = 0; k < value.size(); ++k) {
        velocity[k] = momentum_ * velocity[k] + grad[k];
        value[k] -= learning_rate_ * velocity[k];
      }
    } else {
      for (std::size_t k = 0; k < value.size(); ++k) value[k] -= learning_rate_ * grad[k];
    }
    ++index;
  }
  params.zero_grad();
  ++steps_;
}

void sgd_step(ParameterSet& params, double learning_rate) { Sgd(learning_rate).step(params); }

}  // namespace seqrec::nn
