// src/model.cc

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

#include "model.h"

#include <cmath>
#include <random>
#include <sstream>

#include "error.h"

namespace trlab {

using numkit::AccumulateOuter;
using numkit::AddTo;
using numkit::Affine;
using numkit::AffineBackwardInput;
using numkit::LogSigmoid;
using numkit::Sigmoid;

const char *ToString(TransducerMode mode) {
  return mode == TransducerMode::kHat ? "hat" : "rnnt";
}

const char *ToString(CtcHead head) {
  switch (head) {
    case CtcHead::kNone: return "none";
    case CtcHead::kCtc: return "ctc";
    case CtcHead::kFctc: return "fctc";
    case CtcHead::kIam: return "iam";
  }
  return "?";
}

Vocabulary Vocabulary::Synthetic(std::size_t size) {
  if (size < 2) Fail(ErrorCode::kInvalidArgument, "vocabulary needs K >= 2");
  Vocabulary v;
  v.size = size;
  v.blank_id = 0;
  v.token_names.push_back("<b>");
  for (std::size_t k = 1; k < size; ++k) {
    if (size - 1 <= 26) {
      v.token_names.push_back(std::string(1, static_cast<char>('a' + k - 1)));
    } else {
      v.token_names.push_back("t" + std::to_string(k));
    }
  }
  return v;
}

const std::string &Vocabulary::Name(Token token) const {
  if (token >= size) Fail(ErrorCode::kInvalidArgument, "token out of range");
  return token_names[token];
}

std::string Vocabulary::Join(std::span<const Token> tokens) const {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += ' ';
    out += Name(tokens[i]);
  }
  return out;
}

std::vector<Token> Vocabulary::Parse(const std::string &text) const {
  std::istringstream in(text);
  std::vector<Token> out;
  std::string word;
  while (in >> word) {
    bool found = false;
    for (std::size_t k = 1; k < size; ++k) {
      if (token_names[k] == word) {
        out.push_back(static_cast<Token>(k));
        found = true;
        break;
      }
    }
    if (!found) Fail(ErrorCode::kInvalidArgument, "unknown token '" + word + "'");
  }
  return out;
}

void Validate(const ModelConfig &c) {
  if (c.vocab_size < 2) Fail(ErrorCode::kInvalidArgument, "vocab_size must be >= 2");
  if (c.blank_id != 0) Fail(ErrorCode::kInvalidArgument, "blank_id must be 0");
  if (c.feat_dim == 0 || c.hidden_dim == 0 || c.joint_dim == 0)
    Fail(ErrorCode::kInvalidArgument, "model dimensions must be positive");
  if (c.stride == 0) Fail(ErrorCode::kInvalidArgument, "stride must be positive");
  if (c.encoder_layers == 0)
    Fail(ErrorCode::kInvalidArgument, "encoder needs at least one layer");
  if (c.mode == TransducerMode::kHat && c.vocab_size < 2)
    Fail(ErrorCode::kInvalidArgument, "HAT needs at least one label");
}

std::size_t ParameterSet::Add(std::string name, std::size_t rows, std::size_t cols) {
  tensors_.push_back({std::move(name), Matrix(rows, cols)});
  return tensors_.size() - 1;
}

std::size_t ParameterSet::ScalarCount() const {
  std::size_t n = 0;
  for (const auto &t : tensors_) n += t.value.size();
  return n;
}

ParameterSet ParameterSet::ZerosLike() const {
  ParameterSet out = *this;
  out.SetZero();
  return out;
}

void ParameterSet::SetZero() {
  for (auto &t : tensors_) t.value.set_zero();
}

void ParameterSet::AddScaled(const ParameterSet &other, double scale) {
  for (std::size_t i = 0; i < tensors_.size(); ++i) {
    auto &dst = tensors_[i].value.data;
    const auto &src = other.tensors_[i].value.data;
    for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += scale * src[j];
  }
}

double ParameterSet::SquaredNorm() const {
  double acc = 0.0;
  for (const auto &t : tensors_)
    for (double v : t.value.data) acc += v * v;
  return acc;
}

bool ParameterSet::SameLayout(const ParameterSet &other) const {
  if (tensors_.size() != other.tensors_.size()) return false;
  for (std::size_t i = 0; i < tensors_.size(); ++i) {
    const auto &a = tensors_[i];
    const auto &b = other.tensors_[i];
    if (a.name != b.name || a.value.rows != b.value.rows ||
        a.value.cols != b.value.cols)
      return false;
  }
  return true;
}

ParameterSet MakeParameterSet(const ModelConfig &c, ParameterLayout *layout) {
  Validate(c);
  ParameterSet p;
  ParameterLayout l;
  const std::size_t h = c.hidden_dim, j = c.joint_dim, k = c.vocab_size;
  for (std::size_t i = 0; i < c.encoder_layers; ++i) {
    const std::size_t in = i == 0 ? c.EncoderInputDim() : h;
    const std::string prefix = "enc." + std::to_string(i);
    l.enc_w.push_back(p.Add(prefix + ".w", h, in));
    l.enc_b.push_back(p.Add(prefix + ".b", h, 1));
  }
  l.embed = p.Add("pred.embed", k, h);
  l.update_w = p.Add("pred.update.w", h, h);
  l.update_u = p.Add("pred.update.u", h, h);
  l.update_b = p.Add("pred.update.b", h, 1);
  l.reset_w = p.Add("pred.reset.w", h, h);
  l.reset_u = p.Add("pred.reset.u", h, h);
  l.reset_b = p.Add("pred.reset.b", h, 1);
  l.cand_w = p.Add("pred.cand.w", h, h);
  l.cand_u = p.Add("pred.cand.u", h, h);
  l.cand_b = p.Add("pred.cand.b", h, 1);
  l.joint_enc = p.Add("joint.enc_proj", j, h);
  l.joint_pred = p.Add("joint.pred_proj", j, h);
  l.joint_bias = p.Add("joint.bias", j, 1);
  if (c.mode == TransducerMode::kRnnt) {
    l.out_w = p.Add("joint.out.w", k, j);
    l.out_b = p.Add("joint.out.b", k, 1);
  } else {
    l.blank_w = p.Add("joint.blank.w", 1, j);
    l.blank_b = p.Add("joint.blank.b", 1, 1);
    l.label_w = p.Add("joint.label.w", k - 1, j);
    l.label_b = p.Add("joint.label.b", k - 1, 1);
  }
  if (c.ctc_head == CtcHead::kCtc) {
    l.ctc_w = p.Add("ctc.w", k, h);
    l.ctc_b = p.Add("ctc.b", k, 1);
  } else if (c.ctc_head == CtcHead::kFctc) {
    l.fctc_blank_w = p.Add("ctc.blank.w", 1, h);
    l.fctc_blank_b = p.Add("ctc.blank.b", 1, 1);
    l.fctc_label_w = p.Add("ctc.label.w", k - 1, h);
    l.fctc_label_b = p.Add("ctc.label.b", k - 1, 1);
  }
  if (layout) *layout = l;
  return p;
}

namespace {

// Fan-in of the layer owning each tensor; biases share their weight's fan-in.
std::size_t FanIn(const std::string &name, const Matrix &m,
                  const ParameterSet &p, std::size_t index) {
  if (name == "pred.embed") return 1;
  if (m.cols == 1 && index > 0) return p[index - 1].cols;
  return m.cols;
}

std::span<const double> Col(const Matrix &m) { return {m.data.data(), m.data.size()}; }

}  // namespace

Model::Model(const ModelConfig &config, std::uint64_t seed) : config_(config) {
  params_ = MakeParameterSet(config_, &layout_);
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < params_.count(); ++i) {
    Matrix &m = params_[i];
    const double r = 1.0 / std::sqrt(static_cast<double>(FanIn(params_.name(i), m, params_, i)));
    std::uniform_real_distribution<double> dist(-r, r);
    for (double &v : m.data) v = dist(rng);
  }
}

Model::Model(const ModelConfig &config, ParameterSet params) : config_(config) {
  ParameterSet expected = MakeParameterSet(config_, &layout_);
  if (!expected.SameLayout(params))
    Fail(ErrorCode::kFormat, "parameter tensors do not match the model config");
  params_ = std::move(params);
}

EncoderOutput Model::Encode(const Matrix &features) const {
  ForwardCache cache = Forward(*this, features, {}, {false, false, false});
  EncoderOutput out;
  out.hidden = cache.enc_outputs.back();
  out.input_frames = features.rows;
  out.stride = config_.stride;
  return out;
}

RecurrentStep RunRecurrentStep(const Model &model, Token input,
                               std::span<const double> h_prev) {
  const auto &l = model.layout();
  const auto &p = model.params();
  const std::size_t h = model.config().hidden_dim;
  RecurrentStep s;
  s.input = input;
  s.h_prev.assign(h_prev.begin(), h_prev.end());
  auto e = p[l.embed].row(input);

  auto gate = [&](std::size_t w, std::size_t u, std::size_t b,
                  std::span<const double> rec) {
    std::vector<double> a = Affine(p[w], Col(p[b]), e);
    std::vector<double> r(h);
    Affine(p[u], {}, rec, r);
    AddTo(r, a);
    return a;
  };
  s.update = gate(l.update_w, l.update_u, l.update_b, h_prev);
  s.reset = gate(l.reset_w, l.reset_u, l.reset_b, h_prev);
  for (double &v : s.update) v = Sigmoid(v);
  for (double &v : s.reset) v = Sigmoid(v);
  std::vector<double> gated(h);
  for (std::size_t i = 0; i < h; ++i) gated[i] = s.reset[i] * h_prev[i];
  s.cand = gate(l.cand_w, l.cand_u, l.cand_b, gated);
  numkit::TanhInPlace(s.cand);
  s.h.resize(h);
  for (std::size_t i = 0; i < h; ++i)
    s.h[i] = (1.0 - s.update[i]) * s.cand[i] + s.update[i] * h_prev[i];
  return s;
}

PredictionState Model::StartState() const {
  std::vector<double> zero(config_.hidden_dim, 0.0);
  return {RunRecurrentStep(*this, config_.blank_id, zero).h};
}

PredictionState Model::Extend(const PredictionState &state, Token token) const {
  if (token == config_.blank_id || token >= config_.vocab_size)
    Fail(ErrorCode::kInvalidArgument, "prediction input must be a non-blank token");
  return {RunRecurrentStep(*this, token, state.hidden).h};
}

PredictionState Model::Predict(std::span<const Token> prefix) const {
  PredictionState s = StartState();
  for (Token t : prefix) s = Extend(s, t);
  return s;
}

std::vector<double> Model::EncoderProjection(std::span<const double> h_enc) const {
  return Affine(params_[layout_.joint_enc], {}, h_enc);
}

std::vector<double> Model::PredictionProjection(std::span<const double> h_pred) const {
  return Affine(params_[layout_.joint_pred], {}, h_pred);
}

std::vector<double> Model::JointHidden(std::span<const double> enc_proj,
                                       std::span<const double> pred_proj) const {
  const Matrix &bias = params_[layout_.joint_bias];
  std::vector<double> a(config_.joint_dim, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    double v = enc_proj.empty() ? 0.0 : enc_proj[i];
    v += pred_proj.empty() ? 0.0 : pred_proj[i];
    a[i] = std::tanh(v + bias.data[i]);
  }
  return a;
}

double Model::BlankLogit(std::span<const double> hidden) const {
  if (!is_hat()) Fail(ErrorCode::kUnsupportedOperation, "blank head requires HAT");
  return numkit::Dot(params_[layout_.blank_w].row(0), hidden) +
         params_[layout_.blank_b].data[0];
}

std::vector<double> Model::LabelLogits(std::span<const double> hidden) const {
  if (!is_hat()) Fail(ErrorCode::kUnsupportedOperation, "label head requires HAT");
  return Affine(params_[layout_.label_w], Col(params_[layout_.label_b]), hidden);
}

std::vector<double> Model::OutputLogits(std::span<const double> hidden) const {
  if (is_hat()) Fail(ErrorCode::kUnsupportedOperation, "output layer requires RNNT");
  return Affine(params_[layout_.out_w], Col(params_[layout_.out_b]), hidden);
}

namespace {

// log [ sigmoid(b) ; (1 - sigmoid(b)) * softmax(labels) ]
std::vector<double> FactorizedLogProbs(double blank_logit,
                                       std::span<const double> label_logits) {
  std::vector<double> out(label_logits.size() + 1);
  out[0] = LogSigmoid(blank_logit);
  const double non_blank = LogSigmoid(-blank_logit);
  const std::vector<double> ls = numkit::LogSoftmax(label_logits);
  for (std::size_t j = 0; j < ls.size(); ++j) out[j + 1] = non_blank + ls[j];
  return out;
}

std::vector<double> FactorizedProbs(double blank_logit,
                                    std::span<const double> label_probs) {
  std::vector<double> out(label_probs.size() + 1);
  out[0] = Sigmoid(blank_logit);
  for (std::size_t j = 0; j < label_probs.size(); ++j)
    out[j + 1] = (1.0 - out[0]) * label_probs[j];
  return out;
}

// Gradient of the factorized log-distribution with respect to its logits.
void FactorizedBackward(double blank_logit, std::span<const double> label_logits,
                        std::span<const double> g, double *d_blank,
                        std::vector<double> *d_labels) {
  double label_sum = 0.0;
  for (std::size_t k = 1; k < g.size(); ++k) label_sum += g[k];
  *d_blank = g[0] - Sigmoid(blank_logit) * (g[0] + label_sum);
  const std::vector<double> sm = numkit::Softmax(label_logits);
  d_labels->resize(sm.size());
  for (std::size_t j = 0; j < sm.size(); ++j)
    (*d_labels)[j] = g[j + 1] - sm[j] * label_sum;
}

// Gradient of log_softmax(logits) with respect to logits.
std::vector<double> SoftmaxBackward(std::span<const double> logits,
                                    std::span<const double> g) {
  const std::vector<double> sm = numkit::Softmax(logits);
  double sum = 0.0;
  for (double v : g) sum += v;
  std::vector<double> d(sm.size());
  for (std::size_t k = 0; k < sm.size(); ++k) d[k] = g[k] - sm[k] * sum;
  return d;
}

}  // namespace

std::vector<double> Model::JointLogProbs(std::span<const double> hidden) const {
  if (is_hat()) return FactorizedLogProbs(BlankLogit(hidden), LabelLogits(hidden));
  return numkit::LogSoftmax(OutputLogits(hidden));
}

JointOutput Model::JointEval(std::span<const double> h_enc,
                             std::span<const double> h_pred) const {
  if (h_enc.size() != config_.hidden_dim || h_pred.size() != config_.hidden_dim)
    Fail(ErrorCode::kInvalidArgument, "joint_eval: vector dimension mismatch");
  const std::vector<double> a =
      JointHidden(EncoderProjection(h_enc), PredictionProjection(h_pred));
  JointOutput out;
  if (is_hat()) {
    const double blank = BlankLogit(a);
    const std::vector<double> labels = LabelLogits(a);
    out.blank_prob = Sigmoid(blank);
    out.label_probs = numkit::Softmax(labels);
    out.probs = FactorizedProbs(blank, out.label_probs);
    out.log_probs = FactorizedLogProbs(blank, labels);
  } else {
    const std::vector<double> logits = OutputLogits(a);
    out.probs = numkit::Softmax(logits);
    out.log_probs = numkit::LogSoftmax(logits);
    out.blank_prob = out.probs[config_.blank_id];
  }
  return out;
}

Lattice Model::ComputeLattice(const Matrix &features,
                              std::span<const Token> labels) const {
  return Forward(*this, features, labels, {true, false, false}).lattice;
}

std::vector<double> Model::CtcLogProbs(std::span<const double> h_enc) const {
  switch (config_.ctc_head) {
    case CtcHead::kCtc:
      return numkit::LogSoftmax(
          Affine(params_[layout_.ctc_w], Col(params_[layout_.ctc_b]), h_enc));
    case CtcHead::kFctc: {
      const double blank = numkit::Dot(params_[layout_.fctc_blank_w].row(0), h_enc) +
                           params_[layout_.fctc_blank_b].data[0];
      return FactorizedLogProbs(
          blank, Affine(params_[layout_.fctc_label_w],
                        Col(params_[layout_.fctc_label_b]), h_enc));
    }
    default:
      Fail(ErrorCode::kUnsupportedOperation,
           std::string("model has no linear CTC head (ctc_head=") +
               ToString(config_.ctc_head) + ")");
  }
}

Matrix Model::CtcHeadEval(const EncoderOutput &enc) const {
  Matrix out(enc.frames(), config_.vocab_size);
  for (std::size_t t = 0; t < enc.frames(); ++t) {
    auto h = enc.hidden.row(t);
    std::vector<double> p;
    if (config_.ctc_head == CtcHead::kFctc) {
      const double blank = numkit::Dot(params_[layout_.fctc_blank_w].row(0), h) +
                           params_[layout_.fctc_blank_b].data[0];
      p = FactorizedProbs(blank, numkit::Softmax(Affine(
                                     params_[layout_.fctc_label_w],
                                     Col(params_[layout_.fctc_label_b]), h)));
    } else if (config_.ctc_head == CtcHead::kCtc) {
      p = numkit::Softmax(
          Affine(params_[layout_.ctc_w], Col(params_[layout_.ctc_b]), h));
    } else {
      Fail(ErrorCode::kUnsupportedOperation,
           std::string("model has no linear CTC head (ctc_head=") +
               ToString(config_.ctc_head) + ")");
    }
    std::copy(p.begin(), p.end(), out.row(t).begin());
  }
  return out;
}

Matrix Model::IamEval(const EncoderOutput &enc) const {
  const std::vector<double> zero(config_.hidden_dim, 0.0);
  Matrix out(enc.frames(), config_.vocab_size);
  for (std::size_t t = 0; t < enc.frames(); ++t) {
    const JointOutput j = JointEval(enc.hidden.row(t), zero);
    std::copy(j.probs.begin(), j.probs.end(), out.row(t).begin());
  }
  return out;
}

std::vector<double> Model::IlmEval(std::span<const Token> prefix) const {
  const PredictionState s = Predict(prefix);
  const std::vector<double> a = JointHidden({}, PredictionProjection(s.hidden));
  if (is_hat()) return numkit::Softmax(LabelLogits(a));
  const std::vector<double> logits = OutputLogits(a);
  return numkit::Softmax(std::span<const double>(logits).subspan(1));
}

// ---------------------------------------------------------------------------
// Cached forward pass and backpropagation.

ForwardCache Forward(const Model &model, const Matrix &features,
                     std::span<const Token> labels, ForwardRequest request) {
  const ModelConfig &c = model.config();
  const ParameterLayout &l = model.layout();
  const ParameterSet &p = model.params();
  if (features.cols != c.feat_dim)
    Fail(ErrorCode::kInvalidArgument,
         "feature dim " + std::to_string(features.cols) + " does not match model dim " +
             std::to_string(c.feat_dim));
  for (Token y : labels) {
    if (y == c.blank_id || y >= c.vocab_size)
      Fail(ErrorCode::kInvalidArgument, "label sequence contains blank or out-of-range token");
  }
  if (request.ctc && c.ctc_head == CtcHead::kNone)
    Fail(ErrorCode::kConfig, "frame-level CTC output requested but ctc_head=none");

  ForwardCache cache;
  cache.request = request;
  cache.labels.assign(labels.begin(), labels.end());

  // Encoder: stacked windows of `stride` frames, affine + tanh layers.
  const std::size_t s = c.stride;
  const std::size_t frames = (features.rows + s - 1) / s;
  const std::size_t left = c.LeftContext(), right = c.RightContext();
  Matrix input(frames, c.EncoderInputDim());
  for (std::size_t t = 0; t < frames; ++t) {
    std::size_t col = 0;
    for (std::size_t w = 0; w < left + 1 + right; ++w) {
      const long window = static_cast<long>(t + w) - static_cast<long>(left);
      for (std::size_t j = 0; j < s; ++j) {
        const long frame = window * static_cast<long>(s) + static_cast<long>(j);
        for (std::size_t d = 0; d < c.feat_dim; ++d, ++col) {
          input(t, col) = (frame >= 0 && frame < static_cast<long>(features.rows))
                              ? features(static_cast<std::size_t>(frame), d)
                              : 0.0;
        }
      }
    }
  }
  for (std::size_t i = 0; i < c.encoder_layers; ++i) {
    const Matrix &in = i == 0 ? input : cache.enc_outputs.back();
    Matrix out(frames, c.hidden_dim);
    for (std::size_t t = 0; t < frames; ++t) {
      Affine(p[l.enc_w[i]], Col(p[l.enc_b[i]]), in.row(t), out.row(t));
      numkit::TanhInPlace(out.row(t));
    }
    cache.enc_inputs.push_back(in);
    cache.enc_outputs.push_back(std::move(out));
  }
  const Matrix &h_enc = cache.enc_outputs.back();

  const bool need_pred = request.lattice || request.ilm;
  const bool iam = request.ctc && c.ctc_head == CtcHead::kIam;
  const std::size_t u1 = labels.size() + 1;
  const std::size_t j_dim = c.joint_dim;

  if (need_pred) {
    std::vector<double> h(c.hidden_dim, 0.0);
    cache.h_pred = Matrix(u1, c.hidden_dim);
    for (std::size_t u = 0; u < u1; ++u) {
      const Token in = u == 0 ? c.blank_id : labels[u - 1];
      cache.steps.push_back(RunRecurrentStep(model, in, h));
      h = cache.steps.back().h;
      std::copy(h.begin(), h.end(), cache.h_pred.row(u).begin());
    }
    cache.pred_proj = Matrix(u1, j_dim);
    for (std::size_t u = 0; u < u1; ++u)
      Affine(p[l.joint_pred], {}, cache.h_pred.row(u), cache.pred_proj.row(u));
  }
  if (request.lattice || iam) {
    cache.enc_proj = Matrix(frames, j_dim);
    for (std::size_t t = 0; t < frames; ++t)
      Affine(p[l.joint_enc], {}, h_enc.row(t), cache.enc_proj.row(t));
  }

  if (request.lattice) {
    cache.lattice = Lattice(frames, u1, c.vocab_size);
    cache.lattice_hidden = Matrix(frames * u1, j_dim);
    for (std::size_t t = 0; t < frames; ++t) {
      for (std::size_t u = 0; u < u1; ++u) {
        const std::vector<double> a =
            model.JointHidden(cache.enc_proj.row(t), cache.pred_proj.row(u));
        std::copy(a.begin(), a.end(), cache.lattice_hidden.row(t * u1 + u).begin());
        const std::vector<double> lp = model.JointLogProbs(a);
        std::copy(lp.begin(), lp.end(), cache.lattice.slice(t, u).begin());
      }
    }
  }

  if (request.ctc) {
    cache.ctc_log_probs = Matrix(frames, c.vocab_size);
    if (iam) cache.iam_hidden = Matrix(frames, j_dim);
    for (std::size_t t = 0; t < frames; ++t) {
      std::vector<double> lp;
      if (iam) {
        const std::vector<double> a = model.JointHidden(cache.enc_proj.row(t), {});
        std::copy(a.begin(), a.end(), cache.iam_hidden.row(t).begin());
        lp = model.JointLogProbs(a);
      } else {
        lp = model.CtcLogProbs(h_enc.row(t));
      }
      std::copy(lp.begin(), lp.end(), cache.ctc_log_probs.row(t).begin());
    }
  }

  if (request.ilm) {
    const std::size_t n = labels.size();
    cache.ilm_hidden = Matrix(n, j_dim);
    cache.ilm_log_probs = Matrix(n, c.vocab_size - 1);
    for (std::size_t u = 0; u < n; ++u) {
      const std::vector<double> a = model.JointHidden({}, cache.pred_proj.row(u));
      std::copy(a.begin(), a.end(), cache.ilm_hidden.row(u).begin());
      std::vector<double> lp;
      if (model.is_hat()) {
        lp = numkit::LogSoftmax(model.LabelLogits(a));
      } else {
        const std::vector<double> logits = model.OutputLogits(a);
        lp = numkit::LogSoftmax(std::span<const double>(logits).subspan(1));
      }
      std::copy(lp.begin(), lp.end(), cache.ilm_log_probs.row(u).begin());
    }
  }
  cache.valid = true;
  return cache;
}

namespace {

bool AllZero(std::span<const double> v) {
  for (double x : v)
    if (x != 0.0) return false;
  return true;
}

// Backpropagates g = d(loss)/d(log-probs) of the combined joint distribution
// through the output heads; returns d(loss)/d(hidden).
std::vector<double> JointHeadBackward(const Model &model, std::span<const double> a,
                                      std::span<const double> g, ParameterSet *grads) {
  const ParameterLayout &l = model.layout();
  const ParameterSet &p = model.params();
  std::vector<double> da(a.size(), 0.0);
  if (model.is_hat()) {
    double d_blank = 0.0;
    std::vector<double> d_labels;
    FactorizedBackward(model.BlankLogit(a), model.LabelLogits(a), g, &d_blank,
                       &d_labels);
    const double db[1] = {d_blank};
    AccumulateOuter(db, a, &(*grads)[l.blank_w]);
    (*grads)[l.blank_b].data[0] += d_blank;
    AffineBackwardInput(p[l.blank_w], db, da);
    AccumulateOuter(d_labels, a, &(*grads)[l.label_w]);
    AddTo(d_labels, (*grads)[l.label_b].data);
    AffineBackwardInput(p[l.label_w], d_labels, da);
  } else {
    const std::vector<double> d = SoftmaxBackward(model.OutputLogits(a), g);
    AccumulateOuter(d, a, &(*grads)[l.out_w]);
    AddTo(d, (*grads)[l.out_b].data);
    AffineBackwardInput(p[l.out_w], d, da);
  }
  return da;
}

// Through tanh: returns d(loss)/d(pre-activation) and accumulates the bias.
std::vector<double> TanhBackward(std::span<const double> a, std::span<const double> da) {
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = da[i] * (1.0 - a[i] * a[i]);
  return d;
}

}  // namespace

void Backprop(const Model &model, const ForwardCache &cache,
              const OutputGradients &upstream, ParameterSet *grads) {
  if (!cache.valid)
    Fail(ErrorCode::kPrecondition, "backprop called without a cached forward pass");
  if (!grads || !grads->SameLayout(model.params()))
    Fail(ErrorCode::kInvalidArgument, "gradient buffer does not match model layout");
  const ModelConfig &c = model.config();
  const ParameterLayout &l = model.layout();
  const ParameterSet &p = model.params();
  const Matrix &h_enc = cache.encoder_output();
  const std::size_t frames = h_enc.rows;
  const std::size_t u1 = cache.labels.size() + 1;
  const std::size_t j_dim = c.joint_dim;

  Matrix d_enc_proj(frames, j_dim);
  Matrix d_pred_proj(cache.h_pred.rows, j_dim);
  Matrix d_h_enc(frames, c.hidden_dim);
  std::vector<double> &d_bias = (*grads)[l.joint_bias].data;

  if (!upstream.lattice.empty()) {
    if (!cache.request.lattice)
      Fail(ErrorCode::kPrecondition, "lattice gradient without cached lattice");
    for (std::size_t t = 0; t < frames; ++t) {
      for (std::size_t u = 0; u < u1; ++u) {
        auto g = upstream.lattice.slice(t, u);
        if (AllZero(g)) continue;
        auto a = cache.lattice_hidden.row(t * u1 + u);
        const std::vector<double> pre = TanhBackward(a, JointHeadBackward(model, a, g, grads));
        AddTo(pre, d_enc_proj.row(t));
        AddTo(pre, d_pred_proj.row(u));
        AddTo(pre, d_bias);
      }
    }
  }

  if (!upstream.ctc.empty()) {
    if (!cache.request.ctc)
      Fail(ErrorCode::kPrecondition, "frame gradient without cached frame outputs");
    for (std::size_t t = 0; t < frames; ++t) {
      auto g = upstream.ctc.row(t);
      if (AllZero(g)) continue;
      auto h = h_enc.row(t);
      switch (c.ctc_head) {
        case CtcHead::kIam: {
          auto a = cache.iam_hidden.row(t);
          const std::vector<double> pre =
              TanhBackward(a, JointHeadBackward(model, a, g, grads));
          AddTo(pre, d_enc_proj.row(t));
          AddTo(pre, d_bias);
          break;
        }
        case CtcHead::kCtc: {
          const std::vector<double> d = SoftmaxBackward(
              Affine(p[l.ctc_w], Col(p[l.ctc_b]), h), g);
          AccumulateOuter(d, h, &(*grads)[l.ctc_w]);
          AddTo(d, (*grads)[l.ctc_b].data);
          AffineBackwardInput(p[l.ctc_w], d, d_h_enc.row(t));
          break;
        }
        case CtcHead::kFctc: {
          const double blank = numkit::Dot(p[l.fctc_blank_w].row(0), h) +
                               p[l.fctc_blank_b].data[0];
          double d_blank = 0.0;
          std::vector<double> d_labels;
          FactorizedBackward(blank,
                             Affine(p[l.fctc_label_w], Col(p[l.fctc_label_b]), h),
                             g, &d_blank, &d_labels);
          const double db[1] = {d_blank};
          AccumulateOuter(db, h, &(*grads)[l.fctc_blank_w]);
          (*grads)[l.fctc_blank_b].data[0] += d_blank;
          AffineBackwardInput(p[l.fctc_blank_w], db, d_h_enc.row(t));
          AccumulateOuter(d_labels, h, &(*grads)[l.fctc_label_w]);
          AddTo(d_labels, (*grads)[l.fctc_label_b].data);
          AffineBackwardInput(p[l.fctc_label_w], d_labels, d_h_enc.row(t));
          break;
        }
        case CtcHead::kNone:
          break;
      }
    }
  }

  if (!upstream.ilm.empty()) {
    if (!cache.request.ilm)
      Fail(ErrorCode::kPrecondition, "ILM gradient without cached ILM outputs");
    for (std::size_t u = 0; u + 1 < u1; ++u) {
      auto g = upstream.ilm.row(u);
      if (AllZero(g)) continue;
      auto a = cache.ilm_hidden.row(u);
      std::vector<double> da(j_dim, 0.0);
      if (model.is_hat()) {
        const std::vector<double> d = SoftmaxBackward(model.LabelLogits(a), g);
        AccumulateOuter(d, a, &(*grads)[l.label_w]);
        AddTo(d, (*grads)[l.label_b].data);
        AffineBackwardInput(p[l.label_w], d, da);
      } else {
        const std::vector<double> logits = model.OutputLogits(a);
        const std::vector<double> d_labels =
            SoftmaxBackward(std::span<const double>(logits).subspan(1), g);
        std::vector<double> d(logits.size(), 0.0);
        std::copy(d_labels.begin(), d_labels.end(), d.begin() + 1);
        AccumulateOuter(d, a, &(*grads)[l.out_w]);
        AddTo(d, (*grads)[l.out_b].data);
        AffineBackwardInput(p[l.out_w], d, da);
      }
      const std::vector<double> pre = TanhBackward(a, da);
      AddTo(pre, d_pred_proj.row(u));
      AddTo(pre, d_bias);
    }
  }

  // Joint projections.
  if (!cache.enc_proj.empty()) {
    for (std::size_t t = 0; t < frames; ++t) {
      auto d = d_enc_proj.row(t);
      AccumulateOuter(d, h_enc.row(t), &(*grads)[l.joint_enc]);
      AffineBackwardInput(p[l.joint_enc], d, d_h_enc.row(t));
    }
  }
  Matrix d_h_pred(cache.h_pred.rows, c.hidden_dim);
  for (std::size_t u = 0; u < cache.h_pred.rows; ++u) {
    auto d = d_pred_proj.row(u);
    AccumulateOuter(d, cache.h_pred.row(u), &(*grads)[l.joint_pred]);
    AffineBackwardInput(p[l.joint_pred], d, d_h_pred.row(u));
  }

  // Encoder layers, last to first.
  Matrix d_out = std::move(d_h_enc);
  for (std::size_t i = c.encoder_layers; i-- > 0;) {
    const Matrix &in = cache.enc_inputs[i];
    const Matrix &out = cache.enc_outputs[i];
    Matrix d_in(in.rows, in.cols);
    for (std::size_t t = 0; t < frames; ++t) {
      const std::vector<double> pre = TanhBackward(out.row(t), d_out.row(t));
      AccumulateOuter(pre, in.row(t), &(*grads)[l.enc_w[i]]);
      AddTo(pre, (*grads)[l.enc_b[i]].data);
      if (i > 0) AffineBackwardInput(p[l.enc_w[i]], pre, d_in.row(t));
    }
    d_out = std::move(d_in);
  }

  // Prediction network, backpropagation through time.
  const std::size_t h_dim = c.hidden_dim;
  std::vector<double> carry(h_dim, 0.0);
  for (std::size_t u = cache.steps.size(); u-- > 0;) {
    const RecurrentStep &s = cache.steps[u];
    std::vector<double> dh(h_dim);
    for (std::size_t i = 0; i < h_dim; ++i) dh[i] = d_h_pred(u, i) + carry[i];
    std::vector<double> d_prev(h_dim), d_cand(h_dim), d_update(h_dim);
    for (std::size_t i = 0; i < h_dim; ++i) {
      d_prev[i] = dh[i] * s.update[i];
      d_cand[i] = dh[i] * (1.0 - s.update[i]) * (1.0 - s.cand[i] * s.cand[i]);
      d_update[i] = dh[i] * (s.h_prev[i] - s.cand[i]) * s.update[i] * (1.0 - s.update[i]);
    }
    auto e = p[l.embed].row(s.input);
    std::vector<double> de(h_dim, 0.0);
    std::vector<double> gated(h_dim);
    for (std::size_t i = 0; i < h_dim; ++i) gated[i] = s.reset[i] * s.h_prev[i];

    AccumulateOuter(d_cand, e, &(*grads)[l.cand_w]);
    AccumulateOuter(d_cand, gated, &(*grads)[l.cand_u]);
    AddTo(d_cand, (*grads)[l.cand_b].data);
    AffineBackwardInput(p[l.cand_w], d_cand, de);
    std::vector<double> d_gated(h_dim, 0.0);
    AffineBackwardInput(p[l.cand_u], d_cand, d_gated);
    std::vector<double> d_reset(h_dim);
    for (std::size_t i = 0; i < h_dim; ++i) {
      d_prev[i] += d_gated[i] * s.reset[i];
      d_reset[i] = d_gated[i] * s.h_prev[i] * s.reset[i] * (1.0 - s.reset[i]);
    }
    AccumulateOuter(d_update, e, &(*grads)[l.update_w]);
    AccumulateOuter(d_update, s.h_prev, &(*grads)[l.update_u]);
    AddTo(d_update, (*grads)[l.update_b].data);
    AffineBackwardInput(p[l.update_w], d_update, de);
    AffineBackwardInput(p[l.update_u], d_update, d_prev);
    AccumulateOuter(d_reset, e, &(*grads)[l.reset_w]);
    AccumulateOuter(d_reset, s.h_prev, &(*grads)[l.reset_u]);
    AddTo(d_reset, (*grads)[l.reset_b].data);
    AffineBackwardInput(p[l.reset_w], d_reset, de);
    AffineBackwardInput(p[l.reset_u], d_reset, d_prev);
    AddTo(de, (*grads)[l.embed].row(s.input));
    carry = std::move(d_prev);
  }
}

}  // namespace trlab
