// src/train.cc

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

#include "train.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "error.h"
#include "parallel.h"

namespace trlab {

void Validate(const TrainConfig &c) {
  auto bad = [](const std::string &m) { Fail(ErrorCode::kInvalidArgument, m); };
  if (!(c.alpha >= 0.0) || !(c.beta >= 0.0)) bad("alpha and beta must be >= 0");
  if (!(c.learning_rate >= 0.0)) bad("learning_rate must be >= 0");
  if (c.batch_size == 0) bad("batch_size must be positive");
  if (!(c.grad_clip >= 0.0)) bad("grad_clip must be >= 0");
  if (!(c.adam_beta1 >= 0.0 && c.adam_beta1 < 1.0) ||
      !(c.adam_beta2 >= 0.0 && c.adam_beta2 < 1.0))
    bad("adam betas must be in [0, 1)");
  if (!(c.adam_epsilon > 0.0)) bad("adam_epsilon must be positive");
}

AdamOptimizer::AdamOptimizer(const ParameterSet &like, double beta1, double beta2,
                             double epsilon)
    : m_(like.ZerosLike()), v_(like.ZerosLike()), beta1_(beta1), beta2_(beta2),
      epsilon_(epsilon) {}

void AdamOptimizer::Step(ParameterSet *params, const ParameterSet &grads,
                         double learning_rate) {
  ++steps_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(steps_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(steps_));
  for (std::size_t i = 0; i < params->count(); ++i) {
    auto &p = (*params)[i].data;
    auto &m = m_[i].data;
    auto &v = v_[i].data;
    const auto &g = grads[i].data;
    for (std::size_t j = 0; j < p.size(); ++j) {
      m[j] = beta1_ * m[j] + (1.0 - beta1_) * g[j];
      v[j] = beta2_ * v[j] + (1.0 - beta2_) * g[j] * g[j];
      p[j] -= learning_rate * (m[j] / c1) / (std::sqrt(v[j] / c2) + epsilon_);
    }
  }
}

EpochRecord Evaluate(const Model &model, const std::vector<Utterance> &utts,
                     double alpha, double beta, unsigned jobs) {
  std::vector<LossReport> reports(utts.size());
  const bool has_ctc = model.config().ctc_head != CtcHead::kNone;
  ParallelFor(utts.size(), jobs, [&](std::size_t i) {
    reports[i] = JointLoss(model, utts[i].features, utts[i].reference,
                           has_ctc ? alpha : 0.0, beta);
  });
  EpochRecord rec;
  std::size_t n = 0;
  for (const LossReport &r : reports) {
    if (!r.ctc_admissible) continue;
    rec.rnnt += r.rnnt;
    rec.ctc += r.ctc;
    rec.ilm += r.ilm;
    rec.joint += r.joint;
    ++n;
  }
  if (n > 0) {
    rec.rnnt /= n;
    rec.ctc /= n;
    rec.ilm /= n;
    rec.joint /= n;
  }
  return rec;
}

TrainResult Train(Model *model, const std::vector<Utterance> &train,
                  const std::vector<Utterance> &dev, const TrainConfig &c,
                  const EpochCallback &on_epoch) {
  Validate(c);
  if (train.empty()) Fail(ErrorCode::kInvalidArgument, "training set is empty");
  if (c.alpha > 0 && model->config().ctc_head == CtcHead::kNone)
    Fail(ErrorCode::kConfig, "alpha > 0 requires a CTC head (ctc_head=none)");

  TrainResult result;
  AdamOptimizer adam(model->params(), c.adam_beta1, c.adam_beta2, c.adam_epsilon);
  std::mt19937_64 rng(c.seed);
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);

  const std::vector<Utterance> &selection = dev.empty() ? train : dev;
  ParameterSet best = model->params();
  result.best_dev_loss = Evaluate(*model, selection, c.alpha, c.beta, c.jobs).joint;

  std::vector<ParameterSet> per_utt;
  std::vector<LossReport> reports;
  for (std::size_t epoch = 1; epoch <= c.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    EpochRecord train_rec;
    train_rec.epoch = epoch;
    train_rec.split = "train";
    std::size_t counted = 0;
    for (std::size_t start = 0; start < order.size(); start += c.batch_size) {
      const std::size_t n = std::min(c.batch_size, order.size() - start);
      per_utt.assign(n, model->params().ZerosLike());
      reports.assign(n, LossReport{});
      ParallelFor(n, c.jobs, [&](std::size_t i) {
        const Utterance &u = train[order[start + i]];
        reports[i] = JointLoss(*model, u.features, u.reference, c.alpha, c.beta, &per_utt[i]);
      });
      ParameterSet grads = model->params().ZerosLike();
      std::size_t used = 0;
      for (std::size_t i = 0; i < n; ++i) {
        const LossReport &r = reports[i];
        if (!r.ctc_admissible) {
          ++result.skipped_utterances;
          continue;
        }
        if (!std::isfinite(r.joint))
          Fail(ErrorCode::kNumeric, "non-finite loss on utterance '" +
                                        train[order[start + i]].id + "' in epoch " +
                                        std::to_string(epoch));
        grads.AddScaled(per_utt[i], 1.0);
        train_rec.rnnt += r.rnnt;
        train_rec.ctc += r.ctc;
        train_rec.ilm += r.ilm;
        train_rec.joint += r.joint;
        ++used;
      }
      if (used == 0) continue;
      counted += used;
      for (auto &t : grads.tensors())
        for (double &g : t.value.data) g /= static_cast<double>(used);
      if (c.grad_clip > 0.0) {
        const double norm = std::sqrt(grads.SquaredNorm());
        if (norm > c.grad_clip)
          for (auto &t : grads.tensors())
            for (double &g : t.value.data) g *= c.grad_clip / norm;
      }
      double lr = c.learning_rate;
      if (c.warmup_steps > 0)
        lr *= std::min(1.0, static_cast<double>(adam.steps() + 1) / c.warmup_steps);
      adam.Step(&model->params(), grads, lr);
    }
    if (counted > 0) {
      train_rec.rnnt /= counted;
      train_rec.ctc /= counted;
      train_rec.ilm /= counted;
      train_rec.joint /= counted;
    }
    result.trace.push_back(train_rec);
    if (on_epoch) on_epoch(train_rec);

    EpochRecord dev_rec = Evaluate(*model, selection, c.alpha, c.beta, c.jobs);
    dev_rec.epoch = epoch;
    dev_rec.split = dev.empty() ? "train-eval" : "dev";
    result.trace.push_back(dev_rec);
    if (on_epoch) on_epoch(dev_rec);
    if (dev_rec.joint < result.best_dev_loss) {
      result.best_dev_loss = dev_rec.joint;
      result.best_epoch = epoch;
      best = model->params();
    }
  }
  model->params() = std::move(best);
  return result;
}

}  // namespace trlab
