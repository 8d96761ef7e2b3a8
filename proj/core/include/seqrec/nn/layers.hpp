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
#include <deque>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "seqrec/ingest.hpp"
#include "seqrec/nn/matrix.hpp"
#include "seqrec/random.hpp"

namespace seqrec::nn {

struct Parameter {
  std::string name;
  Matrix value;
  Matrix grad;  // same shape as value
};

// Named parameters with their gradient accumulators, in insertion order.
// Layers refer to their parameters by index so a ParameterSet can be copied
// freely (e.g. to snapshot the best epoch).
class ParameterSet {
 public:
  std::size_t add(std::string name, std::size_t rows, std::size_t cols);

  Parameter& operator[](std::size_t index) { return params_.at(index); }
  const Parameter& operator[](std::size_t index) const { return params_.at(index); }
  // Throws seqrec::Error("unknown_parameter").
  const Parameter& at(std::string_view name) const;
  Parameter& at(std::string_view name);

  std::size_t size() const { return params_.size(); }
  auto begin() { return params_.begin(); }
  auto end() { return params_.end(); }
  auto begin() const { return params_.begin(); }
  auto end() const { return params_.end(); }

  std::size_t scalar_count() const;
  void zero_grad();
  double grad_norm() const;
  // Rescales every gradient so the global L2 norm is at most `max_norm`.
  // Returns the norm before clipping.
  double clip_grad_norm(double max_norm);
  // Copies values (not gradients) from a structurally identical set.
  void assign_values(const ParameterSet& other);

 private:
  std::deque<Parameter> params_;
};

// Uniform in +-sqrt(6 / (fan_in + fan_out)).
void init_glorot_uniform(Matrix& m, std::size_t fan_in, std::size_t fan_out, Rng& rng);

// --- Embedding ---------------------------------------------------------------

// Row t of the result is row tokens[t] of `table`.
Matrix embed(std::span<const Token> tokens, const Matrix& table);
// Scatter-adds d_out rows into the table gradient; repeated tokens accumulate.
void embed_backward(std::span<const Token> tokens, const Matrix& d_out, Matrix& table_grad);

// --- Long short-term memory cell ----------------------------------------------
//
// Gate pre-activations are stacked in blocks of `hidden` rows:
//   [input | forget | output | candidate]
//   i, f, o = logistic(.), g = tanh(.)
//   c' = f * c + i * g,   h' = o * tanh(c')

struct LstmWeights {
  const Matrix& w_input;   // 4h x d
  const Matrix& w_hidden;  // 4h x h
  const Matrix& bias;      // 4h x 1
};

struct LstmGrads {
  Matrix& w_input;
  Matrix& w_hidden;
  Matrix& bias;
};

struct LstmState {
  std::vector<double> h;
  std::vector<double> c;

  static LstmState zeros(std::size_t hidden) { return {std::vector<double>(hidden, 0.0),
                                                       std::vector<double>(hidden, 0.0)}; }
};

struct LstmStepCache {
  std::vector<double> x;
  std::vector<double> h_prev;
  std::vector<double> c_prev;
  std::vector<double> gates;  // activated, 4h
  std::vector<double> c;
  std::vector<double> tanh_c;
};

// Throws seqrec::Error("non_finite") if any intermediate is not finite.
LstmState lstm_step(std::span<const double> x, const LstmState& state, const LstmWeights& weights,
                    LstmStepCache* cache = nullptr);

// Accumulates parameter gradients and writes dL/dx, dL/dh_prev, dL/dc_prev.
void lstm_step_backward(const LstmStepCache& cache, const LstmWeights& weights,
                        std::span<const double> dh, std::span<const double> dc,
                        const LstmGrads& grads, std::span<double> dx, LstmState& d_prev);

// Index handle for one cell's parameters inside a ParameterSet.
struct LstmCell {
  std::size_t w_input = 0;
  std::size_t w_hidden = 0;
  std::size_t bias = 0;
  std::size_t input_dim = 0;
  std::size_t hidden_dim = 0;

  static LstmCell create(ParameterSet& params, std::string_view prefix, std::size_t input_dim,
                         std::size_t hidden_dim);
  // Glorot weights, zero bias except forget gate at `forget_bias`.
  void initialize(ParameterSet& params, Rng& rng, double forget_bias) const;
  LstmWeights weights(const ParameterSet& params) const;
  LstmGrads grads(ParameterSet& params) const;
};

// --- Affine layer and activations ---------------------------------------------

std::vector<double> affine(std::span<const double> x, const Matrix& w, const Matrix& b);
void affine_backward(std::span<const double> x, std::span<const double> dy, const Matrix& w,
                     Matrix& w_grad, Matrix& b_grad, std::span<double> dx);

struct AffineLayer {
  std::size_t weight = 0;  // out x in
  std::size_t bias = 0;    // out x 1
  std::size_t input_dim = 0;
  std::size_t output_dim = 0;

  static AffineLayer create(ParameterSet& params, std::string_view prefix, std::size_t input_dim,
                            std::size_t output_dim);
  void initialize(ParameterSet& params, Rng& rng) const;
};

double sigmoid(double x);
std::vector<double> sigmoid(std::span<const double> x);
// dx = dy * y * (1 - y) where y = sigmoid(x).
std::vector<double> sigmoid_backward(std::span<const double> y, std::span<const double> dy);

std::vector<double> relu(std::span<const double> x);
std::vector<double> relu_backward(std::span<const double> x, std::span<const double> dy);

// --- Loss -------------------------------------------------------------------

enum class LossMode {
  kBinaryCrossEntropy,  // -sum[y log p + (1 - y) log(1 - p)]
  kPositivesOnly,       // -sum y log p
};

inline constexpr double kProbabilityClamp = 1e-7;

struct LossValue {
  double loss = 0.0;
  std::vector<double> grad;  // dL/dP
};

// Sum over items for one user; probabilities are clamped to
// [kProbabilityClamp, 1 - kProbabilityClamp].
LossValue bce_loss(std::span<const double> probabilities, std::span<const double> targets,
                   LossMode mode = LossMode::kBinaryCrossEntropy);

// --- Optimizer --------------------------------------------------------------

// theta <- theta - lr * v, v <- momentum * v + grad. Gradients are zeroed after
// every step. Throws seqrec::Error("non_finite_gradient") naming the parameter.
class Sgd {
 public:
  explicit Sgd(double learning_rate, double momentum = 0.0)
      : learning_rate_(learning_rate), momentum_(momentum) {}

  void step(ParameterSet& params);
  std::size_t steps_taken() const { return steps_; }

 private:
  double learning_rate_;
  double momentum_;
  std::vector<Matrix> velocity_;
  std::size_t steps_ = 0;
};

void sgd_step(ParameterSet& params, double learning_rate);

}  // namespace seqrec::nn
