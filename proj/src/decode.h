// src/decode.h

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

#ifndef TRLAB_DECODE_H_
#define TRLAB_DECODE_H_

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "model.h"

namespace trlab {

enum class ThresholdMode : std::uint8_t { kNone = 0, kHat = 1, kCtc = 2, kDual = 3 };
enum class BlankSource : std::uint8_t { kIam = 0, kFctc = 1 };

const char *ToString(ThresholdMode mode);
const char *ToString(BlankSource source);

// Thresholds are logits: a blank posterior p triggers skipping when
// p >= sigmoid(lambda), i.e. when the blank log-odds reach lambda.
struct ThresholdConfig {
  ThresholdMode mode = ThresholdMode::kNone;
  double hat_lambda = 0.0;
  double ctc_lambda = 0.0;
  BlankSource blank_source = BlankSource::kIam;

  bool hat_gate() const {
    return mode == ThresholdMode::kHat || mode == ThresholdMode::kDual;
  }
  bool ctc_filter() const {
    return mode == ThresholdMode::kCtc || mode == ThresholdMode::kDual;
  }
};

enum class SearchAlgorithm : std::uint8_t { kGreedyCtc = 0, kAlsd = 1, kTsd = 2 };
const char *ToString(SearchAlgorithm algorithm);

struct DecodeConfig {
  SearchAlgorithm algorithm = SearchAlgorithm::kAlsd;
  std::size_t beam = 8;
  // ALSD output length cap as a multiple of the (kept) frame count.
  double alsd_max_symbols = 1.0;
  // TSD label expansions per frame.
  std::size_t tsd_max_expansions = 3;
  // Absolute output length cap for both searches; 0 disables.
  std::size_t max_output_tokens = 0;
};

void Validate(const DecodeConfig &config);
void Validate(const ThresholdConfig &config, const Model &model);

struct DecodeStats {
  std::size_t encoder_frames = 0;
  std::size_t kept_frames = 0;
  std::size_t blank_head_calls = 0;
  std::size_t label_head_calls = 0;
  double decode_seconds = 0.0;
  double audio_seconds = 0.0;

  // Associative and commutative.
  void Merge(const DecodeStats &other);
  // Percentages; 100 when the denominator is zero.
  double Nbp() const;
  double Jcr() const;
  double Rtf() const;
};

struct Hypothesis {
  std::vector<Token> tokens;
  double log_score = 0.0;
  PredictionState state;
};

struct SearchResult {
  std::vector<Hypothesis> nbest;  // best first
  DecodeStats stats;
  const Hypothesis &best() const { return nbest.front(); }
};

// Keep rule applied to blank posteriors: frame t survives iff
// p_t < sigmoid(lambda). Returned indices are strictly increasing.
std::vector<std::size_t> KeepFrames(std::span<const double> blank_probs, double lambda);

// Per-frame blank log-odds log(p / (1 - p)) of the chosen frame-level model.
std::vector<double> BlankLogOdds(const Model &model, const EncoderOutput &enc,
                                 BlankSource source);

struct FrameFilterResult {
  std::vector<std::size_t> kept;
  DecodeStats stats;  // encoder_frames and kept_frames only
};

// Discards every frame whose blank log-odds reach lambda. All frames may be
// discarded, leaving an empty decoder input.
FrameFilterResult CtcBlankFilter(const Model &model, const EncoderOutput &enc,
                                 double lambda, BlankSource source);

struct GateResult {
  bool forced_blank = false;
  double log_blank = 0.0;
  // log[(1 - p_blank) * p_label], K-1 entries; empty when forced_blank.
  std::vector<double> label_log_probs;
};

// One decoder step of the two-head joint network. Evaluates the blank head
// (one blank call); when lambda is set and the blank logit reaches it, returns
// a forced blank without touching the label head, otherwise evaluates the
// label head too (one label call). RNNT models always take both calls.
GateResult EvaluateJointStep(const Model &model, std::span<const double> enc_proj,
                             std::span<const double> pred_proj,
                             std::optional<double> hat_lambda, DecodeStats *stats);

// HAT-only public form over raw encoder/prediction vectors.
GateResult HatBlankGate(const Model &model, std::span<const double> h_enc,
                        const PredictionState &state, double hat_lambda,
                        DecodeStats *stats);

// Searches over the rows of `frames` (encoder outputs, possibly filtered).
SearchResult AlsdDecode(const Model &model, const Matrix &frames,
                        const DecodeConfig &config, const ThresholdConfig &threshold);
SearchResult TsdDecode(const Model &model, const Matrix &frames,
                       const DecodeConfig &config, const ThresholdConfig &threshold);

// Per-frame argmax, merge repeats, drop blanks.
std::vector<Token> GreedyCtcDecode(const Matrix &frame_dists, Token blank = 0);

struct UtteranceResult {
  std::vector<Token> transcript;
  std::vector<Hypothesis> nbest;
  DecodeStats stats;
};

// encode -> optional CTC-blank filter -> ALSD/TSD with optional HAT gate, or
// greedy decoding of the frame-level head. The wall clock covers all three.
UtteranceResult DecodeUtterance(const Model &model, const Matrix &features,
                                const DecodeConfig &config,
                                const ThresholdConfig &threshold);

}  // namespace trlab

#endif  // TRLAB_DECODE_H_
