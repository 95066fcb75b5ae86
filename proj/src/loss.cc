// src/loss.cc

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

#include "loss.h"

#include <cmath>
#include <limits>

#include "error.h"

namespace trlab {

using numkit::kLogZero;
using numkit::LogAdd;

TransducerLossResult RnntLoss(const Lattice &lattice, std::span<const Token> labels,
                              Token blank) {
  const std::size_t frames = lattice.frames;
  const std::size_t u1 = labels.size() + 1;
  if (frames == 0)
    Fail(ErrorCode::kInvalidArgument, "transducer loss needs at least one frame");
  if (lattice.positions != u1)
    Fail(ErrorCode::kInvalidArgument, "lattice height does not match label count");
  for (Token y : labels)
    if (y == blank || y >= lattice.vocab)
      Fail(ErrorCode::kInvalidArgument, "invalid label in transducer target");

  auto label_lp = [&](std::size_t t, std::size_t u) {
    return lattice.at(t, u, labels[u]);
  };
  auto blank_lp = [&](std::size_t t, std::size_t u) { return lattice.at(t, u, blank); };

  std::vector<double> alpha(frames * u1, kLogZero), beta(frames * u1, kLogZero);
  auto A = [&](std::size_t t, std::size_t u) -> double & { return alpha[t * u1 + u]; };
  auto B = [&](std::size_t t, std::size_t u) -> double & { return beta[t * u1 + u]; };

  for (std::size_t t = 0; t < frames; ++t) {
    for (std::size_t u = 0; u < u1; ++u) {
      if (t == 0 && u == 0) {
        A(0, 0) = 0.0;
        continue;
      }
      double v = kLogZero;
      if (t > 0) v = A(t - 1, u) + blank_lp(t - 1, u);
      if (u > 0) v = LogAdd(v, A(t, u - 1) + label_lp(t, u - 1));
      A(t, u) = v;
    }
  }
  for (std::size_t t = frames; t-- > 0;) {
    for (std::size_t u = u1; u-- > 0;) {
      if (t == frames - 1 && u == u1 - 1) {
        B(t, u) = blank_lp(t, u);
        continue;
      }
      double v = kLogZero;
      if (t + 1 < frames) v = B(t + 1, u) + blank_lp(t, u);
      if (u + 1 < u1) v = LogAdd(v, B(t, u + 1) + label_lp(t, u));
      B(t, u) = v;
    }
  }

  TransducerLossResult out;
  const double log_z = B(0, 0);
  out.loss = -log_z;
  out.grad = Lattice(frames, u1, lattice.vocab);
  if (!std::isfinite(log_z)) return out;
  for (std::size_t t = 0; t < frames; ++t) {
    for (std::size_t u = 0; u < u1; ++u) {
      const double a = A(t, u);
      if (a == kLogZero) continue;
      if (t + 1 < frames) {
        out.grad.at(t, u, blank) = -std::exp(a + blank_lp(t, u) + B(t + 1, u) - log_z);
      } else if (u + 1 == u1) {
        out.grad.at(t, u, blank) = -std::exp(a + blank_lp(t, u) - log_z);
      }
      if (u + 1 < u1)
        out.grad.at(t, u, labels[u]) = -std::exp(a + label_lp(t, u) + B(t, u + 1) - log_z);
    }
  }
  return out;
}

std::size_t CtcMinimumFrames(std::span<const Token> labels) {
  std::size_t n = labels.size();
  for (std::size_t i = 1; i < labels.size(); ++i)
    if (labels[i] == labels[i - 1]) ++n;
  return n;
}

CtcLossResult CtcLoss(const Matrix &log_probs, std::span<const Token> labels,
                      Token blank) {
  const std::size_t frames = log_probs.rows;
  const std::size_t k = log_probs.cols;
  for (Token y : labels)
    if (y == blank || y >= k)
      Fail(ErrorCode::kInvalidArgument, "invalid label in CTC target");
  CtcLossResult out;
  out.grad = Matrix(frames, k);
  if (frames == 0 || frames < CtcMinimumFrames(labels)) {
    out.admissible = false;
    out.loss = std::numeric_limits<double>::infinity();
    return out;
  }

  // Extended target: blank, y1, blank, y2, ..., blank.
  const std::size_t s_len = 2 * labels.size() + 1;
  std::vector<Token> ext(s_len, blank);
  for (std::size_t i = 0; i < labels.size(); ++i) ext[2 * i + 1] = labels[i];
  auto can_skip = [&](std::size_t s) {
    return s >= 2 && ext[s] != blank && ext[s] != ext[s - 2];
  };

  // alpha includes the emission at t; beta covers frames after t.
  Matrix alpha(frames, s_len, kLogZero), beta(frames, s_len, kLogZero);
  alpha(0, 0) = log_probs(0, ext[0]);
  if (s_len > 1) alpha(0, 1) = log_probs(0, ext[1]);
  for (std::size_t t = 1; t < frames; ++t) {
    for (std::size_t s = 0; s < s_len; ++s) {
      double v = alpha(t - 1, s);
      if (s >= 1) v = LogAdd(v, alpha(t - 1, s - 1));
      if (can_skip(s)) v = LogAdd(v, alpha(t - 1, s - 2));
      alpha(t, s) = v == kLogZero ? kLogZero : v + log_probs(t, ext[s]);
    }
  }
  beta(frames - 1, s_len - 1) = 0.0;
  if (s_len > 1) beta(frames - 1, s_len - 2) = 0.0;
  for (std::size_t t = frames - 1; t-- > 0;) {
    for (std::size_t s = 0; s < s_len; ++s) {
      double v = beta(t + 1, s) + log_probs(t + 1, ext[s]);
      if (s + 1 < s_len) v = LogAdd(v, beta(t + 1, s + 1) + log_probs(t + 1, ext[s + 1]));
      if (s + 2 < s_len && can_skip(s + 2))
        v = LogAdd(v, beta(t + 1, s + 2) + log_probs(t + 1, ext[s + 2]));
      beta(t, s) = v;
    }
  }
  double log_z = alpha(frames - 1, s_len - 1);
  if (s_len > 1) log_z = LogAdd(log_z, alpha(frames - 1, s_len - 2));
  out.loss = -log_z;
  if (!std::isfinite(log_z)) return out;
  for (std::size_t t = 0; t < frames; ++t) {
    for (std::size_t s = 0; s < s_len; ++s) {
      const double occ = alpha(t, s) + beta(t, s);
      if (occ == kLogZero) continue;
      out.grad(t, ext[s]) -= std::exp(occ - log_z);
    }
  }
  return out;
}

IlmLossResult IlmLossFromLogProbs(const Matrix &ilm_log_probs,
                                  std::span<const Token> labels) {
  IlmLossResult out;
  out.grad = Matrix(ilm_log_probs.rows, ilm_log_probs.cols);
  if (labels.empty()) return out;
  if (ilm_log_probs.rows != labels.size())
    Fail(ErrorCode::kInvalidArgument, "ILM output rows do not match label count");
  const double scale = 1.0 / static_cast<double>(labels.size());
  for (std::size_t u = 0; u < labels.size(); ++u) {
    const std::size_t j = labels[u] - 1;
    out.loss -= ilm_log_probs(u, j);
    out.grad(u, j) = -scale;
  }
  out.loss *= scale;
  return out;
}

double IlmLoss(const Model &model, std::span<const Token> labels,
               ParameterSet *grads) {
  if (labels.empty()) return 0.0;
  const Matrix no_audio(0, model.config().feat_dim);
  const ForwardCache cache = Forward(model, no_audio, labels, {false, false, true});
  IlmLossResult r = IlmLossFromLogProbs(cache.ilm_log_probs, labels);
  if (grads) {
    OutputGradients up;
    up.ilm = std::move(r.grad);
    Backprop(model, cache, up, grads);
  }
  return r.loss;
}

LossReport ComputeLoss(const Model &model, const Matrix &features,
                       std::span<const Token> labels, const LossWeights &w,
                       ParameterSet *grads) {
  if (w.rnnt < 0 || w.ctc < 0 || w.ilm < 0)
    Fail(ErrorCode::kInvalidArgument, "loss weights must be non-negative");
  const bool has_ctc = model.config().ctc_head != CtcHead::kNone;
  if (!has_ctc && w.ctc > 0)
    Fail(ErrorCode::kConfig, "alpha > 0 requires a CTC head (ctc_head=none)");

  ForwardRequest req;
  req.lattice = true;
  req.ctc = has_ctc;
  req.ilm = !labels.empty();
  const ForwardCache cache = Forward(model, features, labels, req);

  LossReport report;
  report.alpha = w.ctc;
  report.beta = w.ilm;
  TransducerLossResult rnnt = RnntLoss(cache.lattice, labels, model.config().blank_id);
  report.rnnt = rnnt.loss;

  CtcLossResult ctc;
  if (has_ctc) {
    ctc = CtcLoss(cache.ctc_log_probs, labels, model.config().blank_id);
    report.ctc = ctc.loss;
    report.ctc_admissible = ctc.admissible;
  }
  IlmLossResult ilm;
  if (req.ilm) {
    ilm = IlmLossFromLogProbs(cache.ilm_log_probs, labels);
    report.ilm = ilm.loss;
  }
  report.joint = w.rnnt * report.rnnt;
  if (w.ctc > 0) report.joint += w.ctc * report.ctc;
  if (w.ilm > 0) report.joint += w.ilm * report.ilm;

  if (grads) {
    OutputGradients up;
    if (w.rnnt > 0) {
      up.lattice = std::move(rnnt.grad);
      if (w.rnnt != 1.0)
        for (double &g : up.lattice.data) g *= w.rnnt;
    }
    if (w.ctc > 0 && ctc.admissible) {
      up.ctc = std::move(ctc.grad);
      for (double &g : up.ctc.data) g *= w.ctc;
    }
    if (w.ilm > 0 && req.ilm) {
      up.ilm = std::move(ilm.grad);
      for (double &g : up.ilm.data) g *= w.ilm;
    }
    Backprop(model, cache, up, grads);
  }
  return report;
}

}  // namespace trlab
