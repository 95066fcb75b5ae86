// tests/oracles.h

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

// Independent reference computations used by the unit and acceptance tests.
// Nothing here calls the dynamic programs or kernels under test.

#ifndef TRLAB_TESTS_ORACLES_H_
#define TRLAB_TESTS_ORACLES_H_

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "model.h"

namespace oracle {

using trlab::Lattice;
using trlab::Matrix;
using trlab::Token;

inline std::vector<long double> SoftmaxLd(const std::vector<double> &x) {
  long double sum = 0.0L;
  std::vector<long double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) sum += out[i] = std::exp(static_cast<long double>(x[i]));
  for (long double &v : out) v /= sum;
  return out;
}

inline std::vector<double> LogSoftmaxLd(const std::vector<double> &x) {
  long double sum = 0.0L;
  for (double v : x) sum += std::exp(static_cast<long double>(v));
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i)
    out[i] = static_cast<double>(static_cast<long double>(x[i]) - std::log(sum));
  return out;
}

inline std::vector<double> RandomVector(std::mt19937_64 &rng, std::size_t n, double scale) {
  std::uniform_real_distribution<double> u(-scale, scale);
  std::vector<double> v(n);
  for (double &x : v) x = u(rng);
  return v;
}

inline Matrix RandomMatrix(std::mt19937_64 &rng, std::size_t rows, std::size_t cols,
                           double scale) {
  Matrix m(rows, cols);
  m.data = RandomVector(rng, rows * cols, scale);
  return m;
}

// Lattice whose every (t, u) slice is a random normalized log-distribution.
inline Lattice RandomLattice(std::mt19937_64 &rng, std::size_t t, std::size_t u1, std::size_t k) {
  Lattice lat(t, u1, k);
  for (std::size_t i = 0; i < t; ++i)
    for (std::size_t j = 0; j < u1; ++j) {
      const std::vector<double> lp = LogSoftmaxLd(RandomVector(rng, k, 2.0));
      std::copy(lp.begin(), lp.end(), lat.slice(i, j).begin());
    }
  return lat;
}

inline Matrix RandomFrameLogProbs(std::mt19937_64 &rng, std::size_t t, std::size_t k) {
  Matrix m(t, k);
  for (std::size_t i = 0; i < t; ++i) {
    const std::vector<double> lp = LogSoftmaxLd(RandomVector(rng, k, 2.0));
    std::copy(lp.begin(), lp.end(), m.row(i).begin());
  }
  return m;
}

inline std::vector<Token> RandomLabels(std::mt19937_64 &rng, std::size_t n, std::size_t k) {
  std::uniform_int_distribution<Token> d(1, static_cast<Token>(k - 1));
  std::vector<Token> y(n);
  for (Token &v : y) v = d(rng);
  return y;
}

// -log of the total probability of every monotonic transducer alignment,
// enumerated path by path in extended precision.
inline double BruteRnntLoss(const Lattice &lat, const std::vector<Token> &y, Token blank = 0) {
  const std::size_t T = lat.frames, U = y.size();
  long double total = 0.0L;
  std::function<void(std::size_t, std::size_t, long double)> walk =
      [&](std::size_t t, std::size_t u, long double logp) {
        if (u < U) walk(t, u + 1, logp + lat.at(t, u, y[u]));
        if (t + 1 < T) {
          walk(t + 1, u, logp + lat.at(t, u, blank));
        } else if (u == U) {
          total += std::exp(logp + lat.at(t, u, blank));
        }
      };
  walk(0, 0, 0.0L);
  return static_cast<double>(-std::log(total));
}

inline std::vector<Token> Collapse(const std::vector<Token> &path, Token blank = 0) {
  std::vector<Token> out;
  Token prev = blank;
  for (Token s : path) {
    if (s != blank && s != prev) out.push_back(s);
    prev = s;
  }
  return out;
}

// -log sum over all K^T frame paths that collapse to y.
inline double BruteCtcLoss(const Matrix &log_probs, const std::vector<Token> &y,
                           Token blank = 0) {
  const std::size_t T = log_probs.rows, K = log_probs.cols;
  std::vector<Token> path(T, 0);
  long double total = 0.0L;
  while (true) {
    if (Collapse(path, blank) == y) {
      long double lp = 0.0L;
      for (std::size_t t = 0; t < T; ++t) lp += log_probs(t, path[t]);
      total += std::exp(lp);
    }
    std::size_t i = 0;
    while (i < T && ++path[i] == K) path[i++] = 0;
    if (i == T) break;
  }
  return total > 0.0L ? static_cast<double>(-std::log(total))
                      : std::numeric_limits<double>::infinity();
}

inline double RelativeError(double analytic, double numeric, double floor) {
  return std::abs(analytic - numeric) /
         std::max({std::abs(analytic), std::abs(numeric), floor});
}

inline double CentralDifference(const std::function<double()> &f, double *x, double h) {
  const double saved = *x;
  *x = saved + h;
  const double plus = f();
  *x = saved - h;
  const double minus = f();
  *x = saved;
  return (plus - minus) / (2.0 * h);
}

// Every sequence over labels 1..K-1 of length <= max_len.
inline std::vector<std::vector<Token>> AllSequences(std::size_t k, std::size_t max_len) {
  std::vector<std::vector<Token>> out{{}};
  std::vector<std::vector<Token>> frontier{{}};
  for (std::size_t len = 1; len <= max_len; ++len) {
    std::vector<std::vector<Token>> next;
    for (const auto &s : frontier)
      for (Token a = 1; a < k; ++a) {
        auto t = s;
        t.push_back(a);
        next.push_back(t);
      }
    out.insert(out.end(), next.begin(), next.end());
    frontier = std::move(next);
  }
  return out;
}

inline void ScaleParameters(trlab::Model *model, double factor) {
  for (auto &t : model->params().tensors())
    for (double &v : t.value.data) v *= factor;
}

}  // namespace oracle

#endif  // TRLAB_TESTS_ORACLES_H_
