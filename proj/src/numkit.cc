// src/numkit.cc

// Copyright 2026 The trlab Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "numkit.h"

#include <algorithm>
#include <cmath>

#include "error.h"

namespace trlab {
namespace numkit {

void Matrix::set_zero() { std::fill(data.begin(), data.end(), 0.0); }

std::vector<double> Softmax(std::span<const double> logits) {
  if (logits.empty()) Fail(ErrorCode::kInvalidArgument, "softmax of empty vector");
  const double max = *std::max_element(logits.begin(), logits.end());
  std::vector<double> out(logits.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - max);
    sum += out[i];
  }
  for (double &p : out) p /= sum;
  return out;
}

std::vector<double> LogSoftmax(std::span<const double> logits) {
  if (logits.empty()) Fail(ErrorCode::kInvalidArgument, "softmax of empty vector");
  const double norm = LogSumExp(logits);
  std::vector<double> out(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) out[i] = logits[i] - norm;
  return out;
}

double Sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double LogSigmoid(double x) {
  if (x >= 0.0) return -std::log1p(std::exp(-x));
  return x - std::log1p(std::exp(x));
}

double LogSumExp(std::span<const double> values) {
  if (values.empty()) return kLogZero;
  const double max = *std::max_element(values.begin(), values.end());
  if (max == kLogZero) return kLogZero;
  double sum = 0.0;
  for (double v : values) sum += std::exp(v - max);
  return max + std::log(sum);
}

double LogAdd(double a, double b) {
  if (a < b) std::swap(a, b);
  if (b == kLogZero) return a;
  return a + std::log1p(std::exp(b - a));
}

void Affine(const Matrix &w, std::span<const double> b,
            std::span<const double> x, std::span<double> y) {
  if (x.size() != w.cols || y.size() != w.rows ||
      (!b.empty() && b.size() != w.rows)) {
    Fail(ErrorCode::kInvalidArgument, "affine: dimension mismatch");
  }
  for (std::size_t r = 0; r < w.rows; ++r) {
    const double *wr = w.data.data() + r * w.cols;
    double acc = b.empty() ? 0.0 : b[r];
    for (std::size_t c = 0; c < w.cols; ++c) acc += wr[c] * x[c];
    y[r] = acc;
  }
}

std::vector<double> Affine(const Matrix &w, std::span<const double> b,
                           std::span<const double> x) {
  std::vector<double> y(w.rows);
  Affine(w, b, x, y);
  return y;
}

void AffineBackwardInput(const Matrix &w, std::span<const double> dy,
                         std::span<double> dx) {
  for (std::size_t r = 0; r < w.rows; ++r) {
    const double g = dy[r];
    if (g == 0.0) continue;
    const double *wr = w.data.data() + r * w.cols;
    for (std::size_t c = 0; c < w.cols; ++c) dx[c] += wr[c] * g;
  }
}

void AccumulateOuter(std::span<const double> dy, std::span<const double> x,
                     Matrix *dw) {
  for (std::size_t r = 0; r < dw->rows; ++r) {
    const double g = dy[r];
    if (g == 0.0) continue;
    double *wr = dw->data.data() + r * dw->cols;
    for (std::size_t c = 0; c < dw->cols; ++c) wr[c] += g * x[c];
  }
}

void AddTo(std::span<const double> v, std::span<double> acc) {
  for (std::size_t i = 0; i < v.size(); ++i) acc[i] += v[i];
}

void TanhInPlace(std::span<double> v) {
  for (double &x : v) x = std::tanh(x);
}

double Dot(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

bool AllFinite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(),
                     [](double x) { return std::isfinite(x); });
}

}  // namespace numkit
}  // namespace trlab
