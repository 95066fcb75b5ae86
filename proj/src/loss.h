// src/loss.h

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

#ifndef TRLAB_LOSS_H_
#define TRLAB_LOSS_H_

#include <span>
#include <vector>

#include "model.h"

namespace trlab {

struct TransducerLossResult {
  double loss = 0.0;  // -log P(y | x), nats
  Lattice grad;       // d(loss)/d(lattice log-probs)
};

// Sums over every monotonic path through the (T, U+1) grid that ends with a
// blank emitted at (T-1, U). Works for any lattice, RNNT or HAT produced.
TransducerLossResult RnntLoss(const Lattice &lattice, std::span<const Token> labels,
                              Token blank = 0);

struct CtcLossResult {
  double loss = 0.0;
  // False when the targets cannot fit into the available frames; loss is
  // then +inf and grad is all zero.
  bool admissible = true;
  Matrix grad;  // T x K
};

// Frames needed to emit `labels` under CTC: one per label plus one blank
// between each pair of identical neighbours.
std::size_t CtcMinimumFrames(std::span<const Token> labels);

CtcLossResult CtcLoss(const Matrix &log_probs, std::span<const Token> labels,
                      Token blank = 0);

struct IlmLossResult {
  double loss = 0.0;
  Matrix grad;  // d(loss)/d(ILM log-probs), U x (K-1)
};

// Per-token mean cross-entropy of the label-only model; zero for U = 0.
IlmLossResult IlmLossFromLogProbs(const Matrix &ilm_log_probs,
                                  std::span<const Token> labels);
// Same, evaluated through the model; parameter gradients are accumulated
// into grads when it is non-null.
double IlmLoss(const Model &model, std::span<const Token> labels,
               ParameterSet *grads = nullptr);

struct LossWeights {
  double rnnt = 1.0;
  double ctc = 0.0;  // alpha
  double ilm = 0.0;  // beta
};

struct LossReport {
  double rnnt = 0.0;
  double ctc = 0.0;
  double ilm = 0.0;
  double joint = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
  bool ctc_admissible = true;
};

// Weighted objective rnnt_w * L_RNNT + alpha * L_CTC + beta * L_ILM. The CTC
// term uses the configured head (CTC, FCTC or the parameter-free IAM view).
// Gradients are accumulated into grads when non-null.
LossReport ComputeLoss(const Model &model, const Matrix &features,
                       std::span<const Token> labels, const LossWeights &weights,
                       ParameterSet *grads = nullptr);

inline LossReport JointLoss(const Model &model, const Matrix &features,
                            std::span<const Token> labels, double alpha,
                            double beta, ParameterSet *grads = nullptr) {
  return ComputeLoss(model, features, labels, {1.0, alpha, beta}, grads);
}

}  // namespace trlab

#endif  // TRLAB_LOSS_H_
