// src/decode.cc

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

#include "decode.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <memory>

#include "data.h"
#include "error.h"

namespace trlab {

const char *ToString(ThresholdMode mode) {
  switch (mode) {
    case ThresholdMode::kNone: return "none";
    case ThresholdMode::kHat: return "hat";
    case ThresholdMode::kCtc: return "ctc";
    case ThresholdMode::kDual: return "dual";
  }
  return "?";
}

const char *ToString(BlankSource source) {
  return source == BlankSource::kIam ? "iam" : "fctc";
}

const char *ToString(SearchAlgorithm algorithm) {
  switch (algorithm) {
    case SearchAlgorithm::kGreedyCtc: return "greedy_ctc";
    case SearchAlgorithm::kAlsd: return "alsd";
    case SearchAlgorithm::kTsd: return "tsd";
  }
  return "?";
}

void Validate(const DecodeConfig &c) {
  if (c.beam < 1) Fail(ErrorCode::kInvalidArgument, "beam must be >= 1");
  if (!(c.alsd_max_symbols > 0.0))
    Fail(ErrorCode::kInvalidArgument, "alsd_max_symbols must be positive");
  if (c.tsd_max_expansions < 1)
    Fail(ErrorCode::kInvalidArgument, "tsd_max_expansions must be >= 1");
}

void Validate(const ThresholdConfig &c, const Model &model) {
  if (!std::isfinite(c.hat_lambda) || !std::isfinite(c.ctc_lambda))
    Fail(ErrorCode::kInvalidArgument, "threshold lambdas must be finite");
  if (c.hat_gate() && !model.is_hat())
    Fail(ErrorCode::kUnsupportedOperation, "HAT-blank thresholding requires a HAT model");
  if (c.ctc_filter() && c.blank_source == BlankSource::kFctc &&
      model.config().ctc_head != CtcHead::kFctc)
    Fail(ErrorCode::kConfig, "blank_source=fctc requires a model with ctc_head=fctc");
}

void DecodeStats::Merge(const DecodeStats &o) {
  encoder_frames += o.encoder_frames;
  kept_frames += o.kept_frames;
  blank_head_calls += o.blank_head_calls;
  label_head_calls += o.label_head_calls;
  decode_seconds += o.decode_seconds;
  audio_seconds += o.audio_seconds;
}

double DecodeStats::Nbp() const {
  return encoder_frames == 0 ? 100.0 : 100.0 * kept_frames / encoder_frames;
}

double DecodeStats::Jcr() const {
  return blank_head_calls == 0 ? 100.0 : 100.0 * label_head_calls / blank_head_calls;
}

double DecodeStats::Rtf() const {
  return audio_seconds > 0.0 ? decode_seconds / audio_seconds : 0.0;
}

std::vector<std::size_t> KeepFrames(std::span<const double> blank_probs, double lambda) {
  const double threshold = numkit::Sigmoid(lambda);
  std::vector<std::size_t> kept;
  for (std::size_t t = 0; t < blank_probs.size(); ++t)
    if (blank_probs[t] < threshold) kept.push_back(t);
  return kept;
}

std::vector<double> BlankLogOdds(const Model &model, const EncoderOutput &enc,
                                 BlankSource source) {
  const ParameterLayout &l = model.layout();
  const ParameterSet &p = model.params();
  std::vector<double> out(enc.frames());
  for (std::size_t t = 0; t < enc.frames(); ++t) {
    auto h = enc.hidden.row(t);
    if (source == BlankSource::kFctc) {
      if (model.config().ctc_head != CtcHead::kFctc)
        Fail(ErrorCode::kConfig, "blank_source=fctc requires a model with ctc_head=fctc");
      out[t] = numkit::Dot(p[l.fctc_blank_w].row(0), h) + p[l.fctc_blank_b].data[0];
      continue;
    }
    const std::vector<double> a = model.JointHidden(model.EncoderProjection(h), {});
    if (model.is_hat()) {
      out[t] = model.BlankLogit(a);
    } else {
      const std::vector<double> logits = model.OutputLogits(a);
      out[t] = logits[0] - numkit::LogSumExp(std::span<const double>(logits).subspan(1));
    }
  }
  return out;
}

FrameFilterResult CtcBlankFilter(const Model &model, const EncoderOutput &enc,
                                 double lambda, BlankSource source) {
  const std::vector<double> odds = BlankLogOdds(model, enc, source);
  FrameFilterResult r;
  for (std::size_t t = 0; t < odds.size(); ++t)
    if (odds[t] < lambda) r.kept.push_back(t);
  r.stats.encoder_frames = enc.frames();
  r.stats.kept_frames = r.kept.size();
  return r;
}

GateResult EvaluateJointStep(const Model &model, std::span<const double> enc_proj,
                             std::span<const double> pred_proj,
                             std::optional<double> hat_lambda, DecodeStats *stats) {
  const std::vector<double> hidden = model.JointHidden(enc_proj, pred_proj);
  GateResult r;
  ++stats->blank_head_calls;
  if (model.is_hat()) {
    const double logit = model.BlankLogit(hidden);
    r.log_blank = numkit::LogSigmoid(logit);
    if (hat_lambda && logit >= *hat_lambda) {
      r.forced_blank = true;
      return r;
    }
    ++stats->label_head_calls;
    const double non_blank = numkit::LogSigmoid(-logit);
    r.label_log_probs = numkit::LogSoftmax(model.LabelLogits(hidden));
    for (double &v : r.label_log_probs) v = non_blank + v;
    return r;
  }
  if (hat_lambda)
    Fail(ErrorCode::kUnsupportedOperation, "HAT-blank thresholding requires a HAT model");
  ++stats->label_head_calls;
  const std::vector<double> lp = numkit::LogSoftmax(model.OutputLogits(hidden));
  r.log_blank = lp[0];
  r.label_log_probs.assign(lp.begin() + 1, lp.end());
  return r;
}

GateResult HatBlankGate(const Model &model, std::span<const double> h_enc,
                        const PredictionState &state, double hat_lambda,
                        DecodeStats *stats) {
  if (!model.is_hat())
    Fail(ErrorCode::kUnsupportedOperation, "HAT-blank thresholding requires a HAT model");
  return EvaluateJointStep(model, model.EncoderProjection(h_enc),
                           model.PredictionProjection(state.hidden), hat_lambda, stats);
}

namespace {

struct NodeState {
  PredictionState pred;
  std::vector<double> pred_proj;
};
using StatePtr = std::shared_ptr<const NodeState>;

struct Candidate {
  std::vector<Token> tokens;
  double score = 0.0;
  // State of `tokens`, or of its parent prefix while `pending` is set.
  StatePtr state;
  bool pending = false;
};

// Higher score first, then shorter, then lexicographically smaller.
bool Better(const Candidate &a, const Candidate &b) {
  if (a.score != b.score) return a.score > b.score;
  if (a.tokens.size() != b.tokens.size()) return a.tokens.size() < b.tokens.size();
  return a.tokens < b.tokens;
}

// Candidate set keyed by token prefix; identical prefixes merge by
// log-sum-exp of their scores.
class Beam {
 public:
  void Add(Candidate c) {
    auto it = set_.find(c.tokens);
    if (it == set_.end()) {
      std::vector<Token> key = c.tokens;
      set_.emplace(std::move(key), std::move(c));
      return;
    }
    it->second.score = numkit::LogAdd(it->second.score, c.score);
    if (it->second.pending && !c.pending) {
      it->second.state = std::move(c.state);
      it->second.pending = false;
    }
  }
  bool empty() const { return set_.empty(); }
  std::vector<Candidate> Top(std::size_t n) const {
    std::vector<Candidate> all;
    all.reserve(set_.size());
    for (const auto &kv : set_) all.push_back(kv.second);
    std::sort(all.begin(), all.end(), Better);
    if (all.size() > n) all.resize(n);
    return all;
  }

 private:
  std::map<std::vector<Token>, Candidate> set_;
};

class StateCache {
 public:
  explicit StateCache(const Model &model) : model_(model) {}

  StatePtr Root() {
    auto s = std::make_shared<NodeState>();
    s->pred = model_.StartState();
    s->pred_proj = model_.PredictionProjection(s->pred.hidden);
    cache_[{}] = s;
    return s;
  }

  void Resolve(std::vector<Candidate> *beam) {
    for (Candidate &c : *beam) {
      if (!c.pending) continue;
      auto it = cache_.find(c.tokens);
      if (it == cache_.end()) {
        auto s = std::make_shared<NodeState>();
        s->pred = model_.Extend(c.state->pred, c.tokens.back());
        s->pred_proj = model_.PredictionProjection(s->pred.hidden);
        it = cache_.emplace(c.tokens, std::move(s)).first;
      }
      c.state = it->second;
      c.pending = false;
    }
  }

 private:
  const Model &model_;
  std::map<std::vector<Token>, StatePtr> cache_;
};

Matrix ProjectFrames(const Model &model, const Matrix &frames) {
  Matrix out(frames.rows, model.config().joint_dim);
  for (std::size_t t = 0; t < frames.rows; ++t) {
    const std::vector<double> p = model.EncoderProjection(frames.row(t));
    std::copy(p.begin(), p.end(), out.row(t).begin());
  }
  return out;
}

void Expand(const Candidate &c, const GateResult &step, Beam *out) {
  for (std::size_t j = 0; j < step.label_log_probs.size(); ++j) {
    Candidate next;
    next.tokens = c.tokens;
    next.tokens.push_back(static_cast<Token>(j + 1));
    next.score = c.score + step.label_log_probs[j];
    next.state = c.state;
    next.pending = true;
    out->Add(std::move(next));
  }
}

std::vector<Hypothesis> ToHypotheses(std::vector<Candidate> beam) {
  std::vector<Hypothesis> out;
  for (Candidate &c : beam)
    out.push_back({std::move(c.tokens), c.score, c.state->pred});
  return out;
}

SearchResult EmptySearch(const Model &model) {
  SearchResult r;
  r.nbest.push_back({{}, 0.0, model.StartState()});
  return r;
}

std::optional<double> GateLambda(const ThresholdConfig &threshold) {
  if (threshold.hat_gate()) return threshold.hat_lambda;
  return std::nullopt;
}

}  // namespace

SearchResult AlsdDecode(const Model &model, const Matrix &frames,
                        const DecodeConfig &config, const ThresholdConfig &threshold) {
  Validate(config);
  Validate(threshold, model);
  const std::size_t num_frames = frames.rows;
  if (num_frames == 0) return EmptySearch(model);

  SearchResult result;
  result.stats.encoder_frames = result.stats.kept_frames = num_frames;
  const Matrix enc_proj = ProjectFrames(model, frames);
  const std::optional<double> lambda = GateLambda(threshold);
  std::size_t max_len = static_cast<std::size_t>(
      std::floor(config.alsd_max_symbols * static_cast<double>(num_frames)));
  if (config.max_output_tokens > 0) max_len = std::min(max_len, config.max_output_tokens);

  StateCache states(model);
  std::vector<Candidate> beam{{{}, 0.0, states.Root(), false}};
  Beam finished;
  // Alignment length i = t + u.
  for (std::size_t i = 0; i < num_frames + max_len && !beam.empty(); ++i) {
    Beam next;
    for (const Candidate &c : beam) {
      const std::size_t u = c.tokens.size();
      const std::size_t t = i - u;
      const GateResult step = EvaluateJointStep(model, enc_proj.row(t), c.state->pred_proj,
                                                lambda, &result.stats);
      Candidate blank{c.tokens, c.score + step.log_blank, c.state, false};
      if (t + 1 == num_frames) {
        finished.Add(std::move(blank));
      } else {
        next.Add(std::move(blank));
      }
      if (!step.forced_blank && u < max_len) Expand(c, step, &next);
    }
    beam = next.Top(config.beam);
    states.Resolve(&beam);
  }
  result.nbest = ToHypotheses(finished.Top(config.beam));
  return result;
}

SearchResult TsdDecode(const Model &model, const Matrix &frames,
                       const DecodeConfig &config, const ThresholdConfig &threshold) {
  Validate(config);
  Validate(threshold, model);
  const std::size_t num_frames = frames.rows;
  if (num_frames == 0) return EmptySearch(model);

  SearchResult result;
  result.stats.encoder_frames = result.stats.kept_frames = num_frames;
  const Matrix enc_proj = ProjectFrames(model, frames);
  const std::optional<double> lambda = GateLambda(threshold);
  const std::size_t max_len = config.max_output_tokens > 0
                                  ? config.max_output_tokens
                                  : std::numeric_limits<std::size_t>::max();

  StateCache states(model);
  std::vector<Candidate> beam{{{}, 0.0, states.Root(), false}};
  for (std::size_t t = 0; t < num_frames; ++t) {
    Beam advanced;
    std::vector<Candidate> frontier = beam;
    for (std::size_t v = 0; v <= config.tsd_max_expansions && !frontier.empty(); ++v) {
      Beam expanded;
      for (const Candidate &c : frontier) {
        const GateResult step = EvaluateJointStep(model, enc_proj.row(t),
                                                  c.state->pred_proj, lambda, &result.stats);
        advanced.Add({c.tokens, c.score + step.log_blank, c.state, false});
        if (v < config.tsd_max_expansions && !step.forced_blank && c.tokens.size() < max_len)
          Expand(c, step, &expanded);
      }
      frontier = expanded.Top(config.beam);
      states.Resolve(&frontier);
    }
    beam = advanced.Top(config.beam);
  }
  result.nbest = ToHypotheses(std::move(beam));
  return result;
}

std::vector<Token> GreedyCtcDecode(const Matrix &frame_dists, Token blank) {
  std::vector<Token> out;
  Token prev = blank;
  for (std::size_t t = 0; t < frame_dists.rows; ++t) {
    auto row = frame_dists.row(t);
    const Token best =
        static_cast<Token>(std::max_element(row.begin(), row.end()) - row.begin());
    if (best != blank && best != prev) out.push_back(best);
    prev = best;
  }
  return out;
}

UtteranceResult DecodeUtterance(const Model &model, const Matrix &features,
                                const DecodeConfig &config,
                                const ThresholdConfig &threshold) {
  Validate(config);
  Validate(threshold, model);
  using Clock = std::chrono::steady_clock;
  const auto start = Clock::now();

  const EncoderOutput enc = model.Encode(features);
  UtteranceResult out;
  if (config.algorithm == SearchAlgorithm::kGreedyCtc) {
    if (threshold.mode != ThresholdMode::kNone)
      Fail(ErrorCode::kConfig, "greedy CTC decoding does not take blank thresholds");
    const CtcHead head = model.config().ctc_head;
    const Matrix dists = (head == CtcHead::kCtc || head == CtcHead::kFctc)
                             ? model.CtcHeadEval(enc)
                             : model.IamEval(enc);
    out.transcript = GreedyCtcDecode(dists, model.config().blank_id);
    out.nbest.push_back({out.transcript, 0.0, {}});
    out.stats.kept_frames = enc.frames();
    out.stats.blank_head_calls = out.stats.label_head_calls = enc.frames();
  } else {
    Matrix frames;
    if (threshold.ctc_filter()) {
      const FrameFilterResult filtered =
          CtcBlankFilter(model, enc, threshold.ctc_lambda, threshold.blank_source);
      frames = Matrix(filtered.kept.size(), enc.hidden.cols);
      for (std::size_t i = 0; i < filtered.kept.size(); ++i) {
        auto src = enc.hidden.row(filtered.kept[i]);
        std::copy(src.begin(), src.end(), frames.row(i).begin());
      }
    } else {
      frames = enc.hidden;
    }
    SearchResult search = config.algorithm == SearchAlgorithm::kAlsd
                              ? AlsdDecode(model, frames, config, threshold)
                              : TsdDecode(model, frames, config, threshold);
    out.stats = search.stats;
    out.stats.kept_frames = frames.rows;
    out.nbest = std::move(search.nbest);
    out.transcript = out.nbest.front().tokens;
  }
  out.stats.encoder_frames = enc.frames();
  out.stats.audio_seconds = features.rows * kFrameSeconds;
  out.stats.decode_seconds = std::chrono::duration<double>(Clock::now() - start).count();
  return out;
}

}  // namespace trlab
