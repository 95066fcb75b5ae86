// src/report.h

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

#ifndef TRLAB_REPORT_H_
#define TRLAB_REPORT_H_

#include <cstdint>
#include <string>
#include <vector>

#include "metrics.h"
#include "train.h"

namespace trlab {

// Comma-separated text artifacts. Each starts with a "# config_hash=<hex>"
// line followed by a header row.

std::string HashHex(std::uint64_t hash);

std::string LossTraceCsv(const std::vector<EpochRecord> &trace, std::uint64_t config_hash);

std::string DecodeReportCsv(const std::vector<Utterance> &utterances,
                            const std::vector<UtteranceResult> &results,
                            const Vocabulary &vocab, const DecodeConfig &config,
                            const ThresholdConfig &threshold, std::uint64_t config_hash);

std::string SummaryCsv(const EvalSummary &summary, const DecodeConfig &config,
                       const ThresholdConfig &threshold, std::uint64_t config_hash);

struct SweepPoint {
  ThresholdConfig threshold;
  EvalSummary summary;
};

std::string SweepCurveCsv(const std::vector<SweepPoint> &points, std::uint64_t config_hash);

// The lambda grid used by sweeps: 0, 2, ..., 16.
std::vector<double> SweepGrid();

}  // namespace trlab

#endif  // TRLAB_REPORT_H_
