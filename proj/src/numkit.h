// src/numkit.h

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

#ifndef TRLAB_NUMKIT_H_
#define TRLAB_NUMKIT_H_

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

namespace trlab {
namespace numkit {

inline constexpr double kLogZero = -std::numeric_limits<double>::infinity();

// Dense row-major matrix of doubles. Vectors (biases, single rows) are stored
// as rows x 1 matrices so that every learnable tensor shares one type.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0)
      : rows(r), cols(c), data(r * c, fill) {}

  double &operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const {
    return data[r * cols + c];
  }
  std::span<double> row(std::size_t r) { return {data.data() + r * cols, cols}; }
  std::span<const double> row(std::size_t r) const {
    return {data.data() + r * cols, cols};
  }
  std::size_t size() const { return data.size(); }
  bool empty() const { return data.empty(); }
  void set_zero();
  bool operator==(const Matrix &other) const = default;
};

std::vector<double> Softmax(std::span<const double> logits);
std::vector<double> LogSoftmax(std::span<const double> logits);

double Sigmoid(double x);
// log(sigmoid(x)) without cancellation for large |x|.
double LogSigmoid(double x);

// log(sum(exp(v))). An all -inf input yields -inf.
double LogSumExp(std::span<const double> values);
double LogAdd(double a, double b);

// y = W x (+ b when b is non-empty).
void Affine(const Matrix &w, std::span<const double> b,
            std::span<const double> x, std::span<double> y);
std::vector<double> Affine(const Matrix &w, std::span<const double> b,
                           std::span<const double> x);

// dx += W^T dy
void AffineBackwardInput(const Matrix &w, std::span<const double> dy,
                         std::span<double> dx);
// dW += dy x^T
void AccumulateOuter(std::span<const double> dy, std::span<const double> x,
                     Matrix *dw);
// acc += v
void AddTo(std::span<const double> v, std::span<double> acc);

void TanhInPlace(std::span<double> v);
double Dot(std::span<const double> a, std::span<const double> b);
bool AllFinite(std::span<const double> v);

}  // namespace numkit
}  // namespace trlab

#endif  // TRLAB_NUMKIT_H_
