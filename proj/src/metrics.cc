// src/metrics.cc

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

#include "metrics.h"

#include <algorithm>

#include "error.h"
#include "parallel.h"

namespace trlab {

EditCounts EditDistance(std::span<const Token> ref, std::span<const Token> hyp) {
  const std::size_t n = ref.size(), m = hyp.size();
  std::vector<std::size_t> cost((n + 1) * (m + 1));
  auto at = [&](std::size_t i, std::size_t j) -> std::size_t & { return cost[i * (m + 1) + j]; };
  for (std::size_t i = 0; i <= n; ++i) at(i, 0) = i;
  for (std::size_t j = 0; j <= m; ++j) at(0, j) = j;
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      const std::size_t diag = at(i - 1, j - 1) + (ref[i - 1] == hyp[j - 1] ? 0 : 1);
      at(i, j) = std::min({diag, at(i - 1, j) + 1, at(i, j - 1) + 1});
    }
  }
  EditCounts out;
  std::size_t i = n, j = m;
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0) {
      const bool same = ref[i - 1] == hyp[j - 1];
      if (at(i, j) == at(i - 1, j - 1) + (same ? 0 : 1)) {
        if (!same) ++out.substitutions;
        --i, --j;
        continue;
      }
    }
    if (i > 0 && at(i, j) == at(i - 1, j) + 1) {
      ++out.deletions;
      --i;
    } else {
      ++out.insertions;
      --j;
    }
  }
  return out;
}

double OracleNbp(const std::vector<Utterance> &utterances, std::size_t stride) {
  if (stride == 0) Fail(ErrorCode::kInvalidArgument, "stride must be positive");
  std::size_t tokens = 0, frames = 0;
  for (const Utterance &u : utterances) {
    tokens += u.reference.size();
    frames += EncoderFrames(u.features.rows, stride);
  }
  return frames == 0 ? 0.0 : 100.0 * static_cast<double>(tokens) / static_cast<double>(frames);
}

EvalSummary Aggregate(std::span<const DecodeStats> stats, std::span<const EvalPair> pairs) {
  if (stats.empty() && pairs.empty())
    Fail(ErrorCode::kInvalidArgument, "aggregate needs at least one utterance");
  EvalSummary s;
  for (const DecodeStats &st : stats) s.totals.Merge(st);
  for (const EvalPair &p : pairs) {
    const EditCounts e = EditDistance(p.reference, p.hypothesis);
    s.substitutions += e.substitutions;
    s.insertions += e.insertions;
    s.deletions += e.deletions;
    s.reference_tokens += p.reference.size();
  }
  const std::size_t errors = s.substitutions + s.insertions + s.deletions;
  if (s.reference_tokens > 0) {
    s.wer = 100.0 * static_cast<double>(errors) / static_cast<double>(s.reference_tokens);
  } else {
    s.wer = errors > 0 ? 100.0 : 0.0;
  }
  s.nbp = s.totals.Nbp();
  s.jcr = s.totals.Jcr();
  s.rtf = s.totals.Rtf();
  return s;
}

CorpusResult DecodeCorpus(const Model &model, const std::vector<Utterance> &utterances,
                          const DecodeConfig &config, const ThresholdConfig &threshold,
                          unsigned jobs) {
  if (utterances.empty()) Fail(ErrorCode::kInvalidArgument, "no utterances to decode");
  Validate(config);
  Validate(threshold, model);
  CorpusResult out;
  out.utterances.resize(utterances.size());
  ParallelFor(utterances.size(), jobs, [&](std::size_t i) {
    out.utterances[i] = DecodeUtterance(model, utterances[i].features, config, threshold);
  });
  std::vector<DecodeStats> stats;
  std::vector<EvalPair> pairs;
  for (std::size_t i = 0; i < utterances.size(); ++i) {
    stats.push_back(out.utterances[i].stats);
    pairs.push_back({utterances[i].reference, out.utterances[i].transcript});
  }
  out.summary = Aggregate(stats, pairs);
  out.summary.oracle_nbp = OracleNbp(utterances, model.config().stride);
  return out;
}

}  // namespace trlab
