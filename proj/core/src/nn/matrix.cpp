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

#include "seqrec/nn/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "seqrec/error.hpp"

namespace seqrec::nn {

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

void Matrix::fill(double value) { std::fill(data_.begin(), data_.end(), value); }

bool Matrix::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

double Matrix::squared_norm() const {
  double total = 0.0;
  for (double v : data_) total += v * v;
  return total;
}

void require_shape(bool ok, const char* what) {
  if (!ok) throw Error("shape_mismatch", std::string("shape mismatch in ") + what);
}

void gemv_accumulate(const Matrix& w, std::span<const double> x, std::span<double> y) {
  require_shape(w.cols() == x.size() && w.rows() == y.size(), "gemv");
  for (std::size_t r = 0; r < w.rows(); ++r) {
    const double* row = w.row(r).data();
    double acc = 0.0;
    for (std::size_t c = 0; c < x.size(); ++c) acc += row[c] * x[c];
    y[r] += acc;
  }
}

void gemv_transpose_accumulate(const Matrix& w, std::span<const double> dy,
                               std::span<double> x_grad) {
  require_shape(w.rows() == dy.size() && w.cols() == x_grad.size(), "gemv_transpose");
  for (std::size_t r = 0; r < w.rows(); ++r) {
    const double g = dy[r];
    if (g == 0.0) continue;
    const double* row = w.row(r).data();
    for (std::size_t c = 0; c < x_grad.size(); ++c) x_grad[c] += row[c] * g;
  }
}

void outer_accumulate(std::span<const double> dy, std::span<const double> x, Matrix& w_grad) {
  require_shape(w_grad.rows() == dy.size() && w_grad.cols() == x.size(), "outer");
  for (std::size_t r = 0; r < dy.size(); ++r) {
    const double g = dy[r];
    if (g == 0.0) continue;
    double* row = w_grad.row(r).data();
    for (std::size_t c = 0; c < x.size(); ++c) row[c] += g * x[c];
  }
}

double dot(std::span<const double> a, std::span<const double> b) {
  require_shape(a.size() == b.size(), "dot");
  double total = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) total += a[i] * b[i];
  return total;
}

}  // namespace seqrec::nn
