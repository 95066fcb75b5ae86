// src/train.h

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

#ifndef TRLAB_TRAIN_H_
#define TRLAB_TRAIN_H_

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "data.h"
#include "loss.h"
#include "model.h"

namespace trlab {

struct TrainConfig {
  double alpha = 0.75;
  double beta = 0.1;
  double learning_rate = 3e-3;
  std::size_t warmup_steps = 0;  // linear warmup, 0 disables
  std::size_t epochs = 20;
  std::size_t batch_size = 8;
  double grad_clip = 5.0;  // global-norm clip, 0 disables
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  std::uint64_t seed = 7;
  unsigned jobs = 1;
};

void Validate(const TrainConfig &config);

// Adam with bias-corrected moments and a fixed (optionally warmed-up) rate.
class AdamOptimizer {
 public:
  AdamOptimizer(const ParameterSet &like, double beta1, double beta2, double epsilon);
  void Step(ParameterSet *params, const ParameterSet &grads, double learning_rate);
  std::size_t steps() const { return steps_; }

 private:
  ParameterSet m_, v_;
  double beta1_, beta2_, epsilon_;
  std::size_t steps_ = 0;
};

struct EpochRecord {
  std::size_t epoch = 0;
  std::string split;  // "train" or "dev"
  double rnnt = 0.0, ctc = 0.0, ilm = 0.0, joint = 0.0;
};

struct TrainResult {
  std::vector<EpochRecord> trace;
  std::size_t best_epoch = 0;  // 0 = initial parameters
  double best_dev_loss = 0.0;
  std::size_t skipped_utterances = 0;  // inadmissible CTC targets
};

using EpochCallback = std::function<void(const EpochRecord &)>;

// Mean loss report over a set of utterances; inadmissible ones are skipped.
EpochRecord Evaluate(const Model &model, const std::vector<Utterance> &utterances,
                     double alpha, double beta, unsigned jobs = 1);

// Minimizes the weighted joint objective. Per-utterance gradients are
// averaged over each batch in a fixed order, so results are bit-identical for
// a given seed whatever `jobs` is. On return the model holds the parameters
// of the epoch with the lowest mean dev L_Joint (train loss if dev is empty).
TrainResult Train(Model *model, const std::vector<Utterance> &train,
                  const std::vector<Utterance> &dev, const TrainConfig &config,
                  const EpochCallback &on_epoch = {});

}  // namespace trlab

#endif  // TRLAB_TRAIN_H_
