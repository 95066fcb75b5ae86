// tests/test_model.cpp

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

#include <doctest.h>

#include <cmath>
#include <random>

#include "checkpoint.h"
#include "error.h"
#include "loss.h"
#include "model.h"
#include "numkit.h"
#include "oracles.h"

using namespace trlab;

namespace {

ModelConfig Tiny(TransducerMode mode, CtcHead head, std::size_t k = 5) {
  ModelConfig c;
  c.mode = mode;
  c.ctc_head = head;
  c.feat_dim = 3;
  c.hidden_dim = 4;
  c.joint_dim = 5;
  c.vocab_size = k;
  c.stride = 2;
  return c;
}

ErrorCode CodeOf(const std::function<void()> &fn) {
  try {
    fn();
  } catch (const Error &e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::kInvalidArgument;
}

// Straight-line re-derivation of the encoder from the raw parameters.
Matrix ReferenceEncode(const Model &m, const Matrix &x) {
  const ModelConfig &c = m.config();
  const auto &p = m.params();
  const auto &l = m.layout();
  const std::size_t s = c.stride, T = (x.rows + s - 1) / s;
  const long first = -static_cast<long>(s);  // one window of left context
  const long span = static_cast<long>(s * (c.causal ? 2 : 3));
  Matrix h(T, c.hidden_dim);
  for (std::size_t t = 0; t < T; ++t) {
    std::vector<long double> in;
    for (long f = first; f < first + span; ++f) {
      const long frame = static_cast<long>(t * s) + f;
      for (std::size_t d = 0; d < c.feat_dim; ++d)
        in.push_back(frame >= 0 && frame < static_cast<long>(x.rows) ? x(frame, d) : 0.0);
    }
    for (std::size_t layer = 0; layer < c.encoder_layers; ++layer) {
      const Matrix &w = p[l.enc_w[layer]];
      const Matrix &b = p[l.enc_b[layer]];
      std::vector<long double> out(c.hidden_dim);
      for (std::size_t i = 0; i < c.hidden_dim; ++i) {
        long double acc = b.data[i];
        for (std::size_t j = 0; j < in.size(); ++j) acc += w(i, j) * in[j];
        out[i] = std::tanh(acc);
      }
      in = out;
    }
    for (std::size_t i = 0; i < c.hidden_dim; ++i) h(t, i) = static_cast<double>(in[i]);
  }
  return h;
}

std::vector<double> ReferenceGru(const Model &m, Token input, const std::vector<double> &h) {
  const auto &p = m.params();
  const auto &l = m.layout();
  const std::size_t n = h.size();
  auto e = p[l.embed].row(input);
  auto pre = [&](std::size_t w, std::size_t u, std::size_t b, const std::vector<double> &rec,
                 std::size_t i) {
    long double acc = p[b].data[i];
    for (std::size_t j = 0; j < n; ++j) acc += p[w](i, j) * e[j] + p[u](i, j) * rec[j];
    return acc;
  };
  std::vector<double> z(n), r(n), rh(n), out(n);
  for (std::size_t i = 0; i < n; ++i) {
    z[i] = static_cast<double>(1.0L / (1.0L + std::exp(-pre(l.update_w, l.update_u, l.update_b, h, i))));
    r[i] = static_cast<double>(1.0L / (1.0L + std::exp(-pre(l.reset_w, l.reset_u, l.reset_b, h, i))));
    rh[i] = r[i] * h[i];
  }
  for (std::size_t i = 0; i < n; ++i) {
    const long double cand = std::tanh(pre(l.cand_w, l.cand_u, l.cand_b, rh, i));
    out[i] = static_cast<double>((1.0L - z[i]) * cand + z[i] * h[i]);
  }
  return out;
}

void ZeroTensor(Model *m, std::size_t index) { m->params()[index].set_zero(); }

}  // namespace

TEST_SUITE("model") {

TEST_CASE("vocabulary names round-trip") {
  const Vocabulary v = Vocabulary::Synthetic(5);
  CHECK(v.size == 5);
  CHECK(v.Name(0) == "<b>");
  const std::vector<Token> y{1, 3, 4};
  CHECK(v.Parse(v.Join(y)) == y);
  CHECK_THROWS_AS(v.Parse("nope"), Error);
}

TEST_CASE("config validation") {
  ModelConfig c = Tiny(TransducerMode::kHat, CtcHead::kIam);
  c.vocab_size = 1;
  CHECK_THROWS_AS(Model(c, 1), Error);
  c = Tiny(TransducerMode::kHat, CtcHead::kIam);
  c.stride = 0;
  CHECK_THROWS_AS(Model(c, 1), Error);
}

TEST_CASE("encoder output length is ceil(T'/s)") {
  Model m(Tiny(TransducerMode::kHat, CtcHead::kIam), 1);
  CHECK(m.Encode(Matrix(8, 3)).frames() == 4);
  CHECK(m.Encode(Matrix(7, 3)).frames() == 4);
  CHECK(m.Encode(Matrix(1, 3)).frames() == 1);
  CHECK(m.Encode(Matrix(8, 3)).SubsampleRatio() == 2.0);
  CHECK(CodeOf([&] { m.Encode(Matrix(8, 4)); }) == ErrorCode::kInvalidArgument);
}

TEST_CASE("zero encoder weights give zero encoder output") {
  Model m(Tiny(TransducerMode::kHat, CtcHead::kIam), 1);
  ZeroTensor(&m, m.layout().enc_w[0]);
  ZeroTensor(&m, m.layout().enc_b[0]);
  std::mt19937_64 rng(1);
  const EncoderOutput enc = m.Encode(oracle::RandomMatrix(rng, 6, 3, 1.0));
  for (double v : enc.hidden.data) CHECK(v == 0.0);
}

TEST_CASE("encoder matches a straight-line reimplementation") {
  std::mt19937_64 rng(2);
  for (bool causal : {false, true}) {
    for (std::size_t layers : {1u, 2u}) {
      ModelConfig c = Tiny(TransducerMode::kHat, CtcHead::kIam);
      c.causal = causal;
      c.encoder_layers = layers;
      Model m(c, 11 + layers);
      const Matrix x = oracle::RandomMatrix(rng, 9, 3, 1.5);
      const Matrix got = m.Encode(x).hidden;
      const Matrix want = ReferenceEncode(m, x);
      for (std::size_t i = 0; i < got.size(); ++i)
        CHECK(std::abs(got.data[i] - want.data[i]) < 1e-14);
    }
  }
}

TEST_CASE("causal encoder ignores future frames") {
  ModelConfig c = Tiny(TransducerMode::kHat, CtcHead::kIam);
  c.causal = true;
  Model m(c, 3);
  std::mt19937_64 rng(3);
  const Matrix x = oracle::RandomMatrix(rng, 10, 3, 1.0);
  const Matrix full = m.Encode(x).hidden;
  for (std::size_t t = 0; t < 5; ++t) {
    Matrix cut(2 * (t + 1), 3);
    std::copy(x.data.begin(), x.data.begin() + cut.size(), cut.data.begin());
    const Matrix part = m.Encode(cut).hidden;
    for (std::size_t i = 0; i <= t; ++i)
      for (std::size_t d = 0; d < c.hidden_dim; ++d) CHECK(part(i, d) == full(i, d));
  }
}

TEST_CASE("prediction network") {
  Model m(Tiny(TransducerMode::kHat, CtcHead::kIam), 4);
  CHECK(m.Predict({}) == m.StartState());
  const std::vector<Token> ab{1, 2};
  CHECK(m.Extend(m.Predict(std::vector<Token>{1}), 2) == m.Predict(ab));
  CHECK_FALSE(m.Predict(std::vector<Token>{1, 2}) == m.Predict(std::vector<Token>{2, 1}));

  // Unrolled by hand: start symbol then three tokens.
  const std::vector<Token> y{3, 1, 4};
  std::vector<double> h(m.config().hidden_dim, 0.0);
  h = ReferenceGru(m, 0, h);
  for (Token t : y) h = ReferenceGru(m, t, h);
  const PredictionState got = m.Predict(y);
  for (std::size_t i = 0; i < h.size(); ++i) CHECK(std::abs(got.hidden[i] - h[i]) < 1e-15);

  CHECK(CodeOf([&] { m.Predict(std::vector<Token>{1, 0}); }) == ErrorCode::kInvalidArgument);
  CHECK(CodeOf([&] { m.Extend(m.StartState(), 0); }) == ErrorCode::kInvalidArgument);
  CHECK(CodeOf([&] { m.Predict(std::vector<Token>{9}); }) == ErrorCode::kInvalidArgument);
}

TEST_CASE("HAT joint with zero blank logit") {
  Model m(Tiny(TransducerMode::kHat, CtcHead::kIam), 5);
  ZeroTensor(&m, m.layout().blank_w);
  ZeroTensor(&m, m.layout().blank_b);
  std::mt19937_64 rng(5);
  const JointOutput j =
      m.JointEval(oracle::RandomVector(rng, 4, 1.0), oracle::RandomVector(rng, 4, 1.0));
  CHECK(j.blank_prob == 0.5);
  double label_mass = 0.0;
  for (std::size_t k = 1; k < j.probs.size(); ++k) label_mass += j.probs[k];
  CHECK(std::abs(label_mass - 0.5) < 1e-15);
}

TEST_CASE("joint distributions are normalized") {
  std::mt19937_64 rng(6);
  for (TransducerMode mode : {TransducerMode::kHat, TransducerMode::kRnnt}) {
    Model m(Tiny(mode, CtcHead::kIam), 6);
    for (int trial = 0; trial < 200; ++trial) {
      const JointOutput j =
          m.JointEval(oracle::RandomVector(rng, 4, 3.0), oracle::RandomVector(rng, 4, 3.0));
      double sum = 0.0;
      for (std::size_t k = 0; k < j.probs.size(); ++k) {
        CHECK(j.probs[k] >= 0.0);
        CHECK(j.probs[k] <= 1.0);
        CHECK(std::abs(std::log(j.probs[k]) - j.log_probs[k]) < 1e-12);
        sum += j.probs[k];
      }
      CHECK(std::abs(sum - 1.0) < 1e-12);
    }
  }
  Model m(Tiny(TransducerMode::kHat, CtcHead::kIam), 6);
  CHECK(CodeOf([&] { m.JointEval(std::vector<double>(3), std::vector<double>(4)); }) ==
        ErrorCode::kInvalidArgument);
}

TEST_CASE("RNNT joint matches a hand-computed softmax") {
  ModelConfig c = Tiny(TransducerMode::kRnnt, CtcHead::kNone, 3);
  Model m(c, 7);
  const auto &l = m.layout();
  const std::vector<double> he{0.1, -0.2, 0.3, 0.4}, hp{-0.5, 0.25, 0.0, 0.125};
  std::vector<double> a(c.joint_dim);
  for (std::size_t i = 0; i < c.joint_dim; ++i) {
    long double acc = m.params()[l.joint_bias].data[i];
    for (std::size_t j = 0; j < 4; ++j)
      acc += m.params()[l.joint_enc](i, j) * he[j] + m.params()[l.joint_pred](i, j) * hp[j];
    a[i] = static_cast<double>(std::tanh(acc));
  }
  std::vector<double> logits(3);
  for (std::size_t k = 0; k < 3; ++k) {
    long double acc = m.params()[l.out_b].data[k];
    for (std::size_t i = 0; i < c.joint_dim; ++i) acc += m.params()[l.out_w](k, i) * a[i];
    logits[k] = static_cast<double>(acc);
  }
  const auto want = oracle::SoftmaxLd(logits);
  const JointOutput j = m.JointEval(he, hp);
  for (std::size_t k = 0; k < 3; ++k)
    CHECK(std::abs(j.probs[k] - static_cast<double>(want[k])) < 1e-14);
  CHECK(j.blank_prob == j.probs[0]);
}

TEST_CASE("lattice shape, slices and normalization") {
  Model m(Tiny(TransducerMode::kHat, CtcHead::kIam, 4), 8);
  std::mt19937_64 rng(8);
  const Lattice one = m.ComputeLattice(oracle::RandomMatrix(rng, 2, 3, 1.0), {});
  CHECK(one.frames == 1);
  CHECK(one.positions == 1);
  CHECK(one.vocab == 4);

  const Matrix x = oracle::RandomMatrix(rng, 6, 3, 1.0);
  const std::vector<Token> y{2, 3};
  const Lattice lat = m.ComputeLattice(x, y);
  CHECK(lat.frames == 3);
  CHECK(lat.positions == 3);
  const EncoderOutput enc = m.Encode(x);
  for (std::size_t t = 0; t < 3; ++t)
    for (std::size_t u = 0; u <= 2; ++u) {
      const PredictionState s = m.Predict(std::span<const Token>(y).first(u));
      const JointOutput j = m.JointEval(enc.hidden.row(t), s.hidden);
      double sum = 0.0;
      for (std::size_t k = 0; k < 4; ++k) {
        CHECK(lat.at(t, u, k) == j.log_probs[k]);
        sum += std::exp(lat.at(t, u, k));
      }
      CHECK(std::abs(sum - 1.0) < 1e-9);
    }
}

TEST_CASE("CTC and FCTC heads") {
  std::mt19937_64 rng(9);
  {
    Model m(Tiny(TransducerMode::kHat, CtcHead::kFctc), 9);
    const EncoderOutput enc = m.Encode(oracle::RandomMatrix(rng, 8, 3, 2.0));
    const Matrix p = m.CtcHeadEval(enc);
    CHECK(p.rows == 4);
    for (std::size_t t = 0; t < p.rows; ++t) {
      double sum = 0.0;
      for (double v : p.row(t)) sum += v;
      CHECK(std::abs(sum - 1.0) < 1e-12);
    }
    ZeroTensor(&m, m.layout().fctc_blank_w);
    ZeroTensor(&m, m.layout().fctc_blank_b);
    ZeroTensor(&m, m.layout().fctc_label_w);
    ZeroTensor(&m, m.layout().fctc_label_b);
    const Matrix z = m.CtcHeadEval(enc);
    for (std::size_t t = 0; t < z.rows; ++t) {
      CHECK(z(t, 0) == 0.5);
      for (std::size_t k = 1; k < 5; ++k) CHECK(std::abs(z(t, k) - 0.125) < 1e-15);
    }
  }
  {
    Model m(Tiny(TransducerMode::kHat, CtcHead::kCtc, 3), 10);
    const EncoderOutput enc = m.Encode(oracle::RandomMatrix(rng, 4, 3, 2.0));
    const Matrix p = m.CtcHeadEval(enc);
    const auto &w = m.params()[m.layout().ctc_w];
    const auto &b = m.params()[m.layout().ctc_b];
    for (std::size_t t = 0; t < p.rows; ++t) {
      std::vector<double> logits(3);
      for (std::size_t k = 0; k < 3; ++k) {
        long double acc = b.data[k];
        for (std::size_t i = 0; i < 4; ++i) acc += w(k, i) * enc.hidden(t, i);
        logits[k] = static_cast<double>(acc);
      }
      const auto want = oracle::SoftmaxLd(logits);
      for (std::size_t k = 0; k < 3; ++k)
        CHECK(std::abs(p(t, k) - static_cast<double>(want[k])) < 1e-14);
    }
  }
  for (CtcHead head : {CtcHead::kNone, CtcHead::kIam}) {
    Model m(Tiny(TransducerMode::kHat, head), 11);
    const EncoderOutput enc = m.Encode(Matrix(4, 3));
    CHECK(CodeOf([&] { m.CtcHeadEval(enc); }) == ErrorCode::kUnsupportedOperation);
  }
}

TEST_CASE("IAM view is the joint network with a zero prediction vector") {
  std::mt19937_64 rng(12);
  for (TransducerMode mode : {TransducerMode::kHat, TransducerMode::kRnnt}) {
    Model m(Tiny(mode, CtcHead::kIam), 12);
    const EncoderOutput enc = m.Encode(oracle::RandomMatrix(rng, 8, 3, 2.0));
    const Matrix iam = m.IamEval(enc);
    const std::vector<double> zero(4, 0.0);
    for (std::size_t t = 0; t < enc.frames(); ++t) {
      const JointOutput j = m.JointEval(enc.hidden.row(t), zero);
      double sum = 0.0;
      for (std::size_t k = 0; k < 5; ++k) {
        CHECK(iam(t, k) == j.probs[k]);
        sum += iam(t, k);
      }
      CHECK(std::abs(sum - 1.0) < 1e-9);
    }
  }
}

TEST_CASE("ILM view is the joint network with a zero encoder vector") {
  const std::vector<double> zero(4, 0.0);
  {
    Model m(Tiny(TransducerMode::kHat, CtcHead::kIam), 13);
    const std::vector<Token> a{1};
    const std::vector<double> ilm = m.IlmEval(a);
    const JointOutput j = m.JointEval(zero, m.Predict(a).hidden);
    REQUIRE(ilm.size() == 4);
    double sum = 0.0;
    for (std::size_t k = 0; k < 4; ++k) {
      CHECK(ilm[k] == j.label_probs[k]);
      sum += ilm[k];
    }
    CHECK(std::abs(sum - 1.0) < 1e-12);
  }
  {
    Model m(Tiny(TransducerMode::kRnnt, CtcHead::kNone), 14);
    const std::vector<Token> ab{2, 1};
    const std::vector<double> ilm = m.IlmEval(ab);
    const JointOutput j = m.JointEval(zero, m.Predict(ab).hidden);
    long double mass = 0.0L;
    for (std::size_t k = 1; k < 5; ++k) mass += j.probs[k];
    for (std::size_t k = 0; k < 4; ++k)
      CHECK(std::abs(ilm[k] - static_cast<double>(j.probs[k + 1] / mass)) < 1e-14);
  }
}

TEST_CASE("IAM adds no parameters") {
  const Model iam(Tiny(TransducerMode::kHat, CtcHead::kIam), 15);
  const Model none(Tiny(TransducerMode::kHat, CtcHead::kNone), 15);
  CHECK(iam.params().SameLayout(none.params()));
  CHECK(iam.params() == none.params());
  const Model fctc(Tiny(TransducerMode::kHat, CtcHead::kFctc), 15);
  CHECK(fctc.params().ScalarCount() > iam.params().ScalarCount());

  const auto before = SerializeCheckpoint(iam);
  std::mt19937_64 rng(15);
  const EncoderOutput enc = iam.Encode(oracle::RandomMatrix(rng, 6, 3, 1.0));
  (void)iam.IamEval(enc);
  CHECK(SerializeCheckpoint(iam) == before);
}

TEST_CASE("backprop contracts") {
  Model m(Tiny(TransducerMode::kHat, CtcHead::kIam), 16);
  std::mt19937_64 rng(16);
  const Matrix x = oracle::RandomMatrix(rng, 6, 3, 1.0);
  const std::vector<Token> y{1, 2};
  const ForwardCache cache = Forward(m, x, y, {true, true, true});

  ParameterSet grads = m.params().ZerosLike();
  OutputGradients zero;
  zero.lattice = Lattice(cache.lattice.frames, cache.lattice.positions, cache.lattice.vocab);
  zero.ctc = Matrix(cache.ctc_log_probs.rows, cache.ctc_log_probs.cols);
  Backprop(m, cache, zero, &grads);
  CHECK(grads.SquaredNorm() == 0.0);

  CHECK(CodeOf([&] { Backprop(m, ForwardCache{}, zero, &grads); }) ==
        ErrorCode::kPrecondition);
  const ForwardCache lattice_only = Forward(m, x, y, {true, false, false});
  CHECK(CodeOf([&] { Backprop(m, lattice_only, zero, &grads); }) == ErrorCode::kPrecondition);
}

TEST_CASE("tied IAM gradients add up") {
  Model m(Tiny(TransducerMode::kHat, CtcHead::kIam), 17);
  std::mt19937_64 rng(17);
  const Matrix x = oracle::RandomMatrix(rng, 10, 3, 1.0);
  const std::vector<Token> y{1, 3};
  ParameterSet g_joint = m.params().ZerosLike();
  ParameterSet g_rnnt = m.params().ZerosLike();
  ParameterSet g_ctc = m.params().ZerosLike();
  ComputeLoss(m, x, y, {1.0, 0.75, 0.0}, &g_joint);
  ComputeLoss(m, x, y, {1.0, 0.0, 0.0}, &g_rnnt);
  ComputeLoss(m, x, y, {0.0, 1.0, 0.0}, &g_ctc);
  g_rnnt.AddScaled(g_ctc, 0.75);
  for (std::size_t i = 0; i < g_joint.count(); ++i)
    for (std::size_t j = 0; j < g_joint[i].size(); ++j)
      CHECK(std::abs(g_joint[i].data[j] - g_rnnt[i].data[j]) <=
            1e-12 * std::max(1.0, std::abs(g_joint[i].data[j])));
  // The IAM path reaches the shared joint-label head.
  CHECK(g_ctc[m.layout().label_w].data != std::vector<double>(g_ctc[m.layout().label_w].size()));
}

}  // TEST_SUITE
