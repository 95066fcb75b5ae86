// src/metrics.h

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

#ifndef TRLAB_METRICS_H_
#define TRLAB_METRICS_H_

#include <span>
#include <vector>

#include "data.h"
#include "decode.h"

namespace trlab {

struct EditCounts {
  std::size_t substitutions = 0;
  std::size_t insertions = 0;
  std::size_t deletions = 0;

  std::size_t errors() const { return substitutions + insertions + deletions; }
  bool operator==(const EditCounts &) const = default;
};

// Minimal Levenshtein alignment; on equal cost a substitution is preferred
// over an insertion/deletion pair.
EditCounts EditDistance(std::span<const Token> ref, std::span<const Token> hyp);

// Sum of reference lengths over sum of encoder frames, in percent.
double OracleNbp(const std::vector<Utterance> &utterances, std::size_t stride);

struct EvalPair {
  std::vector<Token> reference;
  std::vector<Token> hypothesis;
};

struct EvalSummary {
  double wer = 0.0;  // percent
  std::size_t substitutions = 0, insertions = 0, deletions = 0;
  std::size_t reference_tokens = 0;
  double nbp = 0.0;  // percent
  double jcr = 0.0;  // percent
  double rtf = 0.0;
  double oracle_nbp = 0.0;  // percent; filled by callers that know the corpus
  DecodeStats totals;
};

EvalSummary Aggregate(std::span<const DecodeStats> stats, std::span<const EvalPair> pairs);

struct CorpusResult {
  std::vector<UtteranceResult> utterances;
  EvalSummary summary;
};

// Decodes utterances concurrently; results keep input order.
CorpusResult DecodeCorpus(const Model &model, const std::vector<Utterance> &utterances,
                          const DecodeConfig &config, const ThresholdConfig &threshold,
                          unsigned jobs = 1);

}  // namespace trlab

#endif  // TRLAB_METRICS_H_
