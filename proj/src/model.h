// src/model.h

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

#ifndef TRLAB_MODEL_H_
#define TRLAB_MODEL_H_

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "numkit.h"

namespace trlab {

using numkit::Matrix;
using Token = std::uint32_t;

enum class TransducerMode : std::uint8_t { kRnnt = 0, kHat = 1 };

// Auxiliary frame-level head trained with the CTC objective. kIam has no
// parameters of its own: it is the joint network evaluated with a zero
// prediction-network output.
enum class CtcHead : std::uint8_t { kNone = 0, kCtc = 1, kFctc = 2, kIam = 3 };

const char *ToString(TransducerMode mode);
const char *ToString(CtcHead head);

// Token 0 is blank; tokens 1..K-1 are labels. Label-head index j therefore
// maps to vocabulary token j + 1.
struct Vocabulary {
  std::size_t size = 0;
  Token blank_id = 0;
  std::vector<std::string> token_names;

  static Vocabulary Synthetic(std::size_t size);
  const std::string &Name(Token token) const;
  std::string Join(std::span<const Token> tokens) const;
  // Inverse of Join; throws kInvalidArgument on unknown names.
  std::vector<Token> Parse(const std::string &text) const;
};

struct ModelConfig {
  TransducerMode mode = TransducerMode::kHat;
  CtcHead ctc_head = CtcHead::kIam;
  std::size_t feat_dim = 8;
  std::size_t hidden_dim = 32;
  std::size_t joint_dim = 32;
  std::size_t encoder_layers = 1;
  std::size_t vocab_size = 17;
  Token blank_id = 0;
  std::size_t stride = 2;
  // A causal encoder sees one window of left context only; otherwise one
  // window of right context is stacked as well.
  bool causal = false;

  std::size_t LeftContext() const { return 1; }
  std::size_t RightContext() const { return causal ? 0 : 1; }
  std::size_t EncoderInputDim() const {
    return (LeftContext() + 1 + RightContext()) * stride * feat_dim;
  }
  bool operator==(const ModelConfig &) const = default;
};

void Validate(const ModelConfig &config);

struct Tensor {
  std::string name;
  Matrix value;
  bool operator==(const Tensor &) const = default;
};

// Ordered list of named tensors. Gradients and optimizer moments reuse the
// same container with identical layout.
class ParameterSet {
 public:
  std::size_t Add(std::string name, std::size_t rows, std::size_t cols);
  Matrix &operator[](std::size_t i) { return tensors_[i].value; }
  const Matrix &operator[](std::size_t i) const { return tensors_[i].value; }
  const std::string &name(std::size_t i) const { return tensors_[i].name; }
  std::size_t count() const { return tensors_.size(); }
  std::size_t ScalarCount() const;
  ParameterSet ZerosLike() const;
  void SetZero();
  void AddScaled(const ParameterSet &other, double scale);
  double SquaredNorm() const;
  bool SameLayout(const ParameterSet &other) const;
  std::vector<Tensor> &tensors() { return tensors_; }
  const std::vector<Tensor> &tensors() const { return tensors_; }
  bool operator==(const ParameterSet &) const = default;

 private:
  std::vector<Tensor> tensors_;
};

// Positions of each tensor within the model's ParameterSet.
struct ParameterLayout {
  static constexpr std::size_t kAbsent = std::numeric_limits<std::size_t>::max();

  std::vector<std::size_t> enc_w, enc_b;
  std::size_t embed = kAbsent;
  std::size_t update_w = kAbsent, update_u = kAbsent, update_b = kAbsent;
  std::size_t reset_w = kAbsent, reset_u = kAbsent, reset_b = kAbsent;
  std::size_t cand_w = kAbsent, cand_u = kAbsent, cand_b = kAbsent;
  std::size_t joint_enc = kAbsent, joint_pred = kAbsent, joint_bias = kAbsent;
  // RNNT single softmax output.
  std::size_t out_w = kAbsent, out_b = kAbsent;
  // HAT blank / label heads.
  std::size_t blank_w = kAbsent, blank_b = kAbsent;
  std::size_t label_w = kAbsent, label_b = kAbsent;
  // Vanilla CTC linear head.
  std::size_t ctc_w = kAbsent, ctc_b = kAbsent;
  // Factorized CTC heads.
  std::size_t fctc_blank_w = kAbsent, fctc_blank_b = kAbsent;
  std::size_t fctc_label_w = kAbsent, fctc_label_b = kAbsent;
};

// Builds the (zero-valued) parameter set for a config and records where each
// tensor lives. Declared order is the checkpoint order.
ParameterSet MakeParameterSet(const ModelConfig &config, ParameterLayout *layout);

struct EncoderOutput {
  Matrix hidden;  // T x hidden_dim
  std::size_t input_frames = 0;
  std::size_t stride = 1;

  std::size_t frames() const { return hidden.rows; }
  double SubsampleRatio() const {
    return hidden.rows == 0 ? 0.0
                            : static_cast<double>(input_frames) / hidden.rows;
  }
};

// For the gated recurrent cell the output and the recurrent memory coincide.
struct PredictionState {
  std::vector<double> hidden;
  bool operator==(const PredictionState &) const = default;
};

struct JointOutput {
  // HAT: sigmoid blank posterior and the (K-1)-way label softmax.
  // RNNT: blank_prob mirrors probs[0] and label_probs is empty.
  double blank_prob = 0.0;
  std::vector<double> label_probs;
  std::vector<double> probs;      // combined K-vector
  std::vector<double> log_probs;  // log of the combined K-vector
};

// Log-probabilities over (t, u, k), t < T, u <= U, k < K.
struct Lattice {
  std::size_t frames = 0;
  std::size_t positions = 0;  // U + 1
  std::size_t vocab = 0;
  std::vector<double> data;

  Lattice() = default;
  Lattice(std::size_t t, std::size_t u1, std::size_t k, double fill = 0.0)
      : frames(t), positions(u1), vocab(k), data(t * u1 * k, fill) {}
  double &at(std::size_t t, std::size_t u, std::size_t k) {
    return data[(t * positions + u) * vocab + k];
  }
  double at(std::size_t t, std::size_t u, std::size_t k) const {
    return data[(t * positions + u) * vocab + k];
  }
  std::span<double> slice(std::size_t t, std::size_t u) {
    return {data.data() + (t * positions + u) * vocab, vocab};
  }
  std::span<const double> slice(std::size_t t, std::size_t u) const {
    return {data.data() + (t * positions + u) * vocab, vocab};
  }
  bool empty() const { return data.empty(); }
};

class Model {
 public:
  // Uniform init in [-r, r], r = fan_in^{-1/2}.
  Model(const ModelConfig &config, std::uint64_t seed);
  // Adopts externally produced parameters; the layout must match the config.
  Model(const ModelConfig &config, ParameterSet params);

  const ModelConfig &config() const { return config_; }
  const ParameterLayout &layout() const { return layout_; }
  ParameterSet &params() { return params_; }
  const ParameterSet &params() const { return params_; }
  std::size_t vocab_size() const { return config_.vocab_size; }
  bool is_hat() const { return config_.mode == TransducerMode::kHat; }

  EncoderOutput Encode(const Matrix &features) const;

  PredictionState StartState() const;
  PredictionState Extend(const PredictionState &state, Token token) const;
  PredictionState Predict(std::span<const Token> prefix) const;

  JointOutput JointEval(std::span<const double> h_enc,
                        std::span<const double> h_pred) const;
  Lattice ComputeLattice(const Matrix &features,
                         std::span<const Token> labels) const;
  // Frame posteriors (T x K) of the CTC or FCTC head.
  Matrix CtcHeadEval(const EncoderOutput &enc) const;
  // Joint network with the prediction output replaced by zeros (T x K).
  Matrix IamEval(const EncoderOutput &enc) const;
  // Joint network with the encoder output replaced by zeros; distribution
  // over the K-1 labels.
  std::vector<double> IlmEval(std::span<const Token> prefix) const;

  // Pieces shared with decoding. Projections exclude the joint bias.
  std::vector<double> EncoderProjection(std::span<const double> h_enc) const;
  std::vector<double> PredictionProjection(std::span<const double> h_pred) const;
  // tanh(enc_proj + pred_proj + bias); either projection may be empty (zero).
  std::vector<double> JointHidden(std::span<const double> enc_proj,
                                  std::span<const double> pred_proj) const;
  double BlankLogit(std::span<const double> hidden) const;        // HAT
  std::vector<double> LabelLogits(std::span<const double> hidden) const;  // HAT
  std::vector<double> OutputLogits(std::span<const double> hidden) const;  // RNNT
  // Combined log-distribution over K from the joint hidden activation.
  std::vector<double> JointLogProbs(std::span<const double> hidden) const;
  // Frame log-distribution of the CTC/FCTC head for one encoder frame.
  std::vector<double> CtcLogProbs(std::span<const double> h_enc) const;

 private:
  ModelConfig config_;
  ParameterLayout layout_;
  ParameterSet params_;
};

// Activations of one recurrent step, kept for backpropagation.
struct RecurrentStep {
  Token input = 0;  // embedding row; 0 doubles as the start symbol
  std::vector<double> h_prev, update, reset, cand, h;
};

RecurrentStep RunRecurrentStep(const Model &model, Token input,
                               std::span<const double> h_prev);

struct ForwardRequest {
  bool lattice = true;
  bool ctc = false;  // CTC / FCTC / IAM frame distributions
  bool ilm = false;
};

// Activations of one utterance needed to backpropagate any combination of
// the lattice, frame-level and ILM outputs.
struct ForwardCache {
  bool valid = false;
  ForwardRequest request;
  std::vector<Token> labels;
  std::vector<Matrix> enc_inputs;   // per layer, T x in_dim
  std::vector<Matrix> enc_outputs;  // per layer, T x hidden_dim
  std::vector<RecurrentStep> steps; // U + 1
  Matrix h_pred;                    // (U+1) x hidden_dim
  Matrix enc_proj;                  // T x joint_dim
  Matrix pred_proj;                 // (U+1) x joint_dim
  Matrix lattice_hidden;            // T*(U+1) x joint_dim
  Lattice lattice;
  Matrix iam_hidden;                // T x joint_dim (IAM only)
  Matrix ctc_log_probs;             // T x K
  Matrix ilm_hidden;                // U x joint_dim
  Matrix ilm_log_probs;             // U x (K-1)

  const Matrix &encoder_output() const { return enc_outputs.back(); }
};

ForwardCache Forward(const Model &model, const Matrix &features,
                     std::span<const Token> labels, ForwardRequest request);

// Upstream gradients with respect to the cached log-probabilities. Empty
// members contribute nothing.
struct OutputGradients {
  Lattice lattice;
  Matrix ctc;
  Matrix ilm;
};

// Accumulates d(loss)/d(theta) into grads, which must share the model layout.
void Backprop(const Model &model, const ForwardCache &cache,
              const OutputGradients &upstream, ParameterSet *grads);

}  // namespace trlab

#endif  // TRLAB_MODEL_H_
