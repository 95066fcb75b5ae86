// src/report.cc

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

#include "report.h"

#include <cstdio>
#include <sstream>

#include "error.h"

namespace trlab {
namespace {

std::string Num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

std::string Preamble(std::uint64_t hash, const char *header) {
  return "# config_hash=" + HashHex(hash) + "\n" + header + "\n";
}

}  // namespace

std::string HashHex(std::uint64_t hash) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash));
  return buf;
}

std::string LossTraceCsv(const std::vector<EpochRecord> &trace, std::uint64_t config_hash) {
  std::ostringstream os;
  os << Preamble(config_hash, "epoch,split,L_RNNT,L_CTC,L_ILM,L_Joint");
  for (const EpochRecord &r : trace)
    os << r.epoch << ',' << r.split << ',' << Num(r.rnnt) << ',' << Num(r.ctc) << ','
       << Num(r.ilm) << ',' << Num(r.joint) << '\n';
  return os.str();
}

std::string DecodeReportCsv(const std::vector<Utterance> &utterances,
                            const std::vector<UtteranceResult> &results,
                            const Vocabulary &vocab, const DecodeConfig &config,
                            const ThresholdConfig &threshold, std::uint64_t config_hash) {
  if (utterances.size() != results.size())
    Fail(ErrorCode::kInvalidArgument, "utterance/result count mismatch");
  std::ostringstream os;
  os << Preamble(config_hash,
                 "id,transcript,reference,algorithm,mode,lambda_ctc,lambda_hat,nbp,jcr,"
                 "wall_s,audio_s");
  for (std::size_t i = 0; i < results.size(); ++i) {
    const DecodeStats &s = results[i].stats;
    os << utterances[i].id << ',' << vocab.Join(results[i].transcript) << ','
       << vocab.Join(utterances[i].reference) << ',' << ToString(config.algorithm) << ','
       << ToString(threshold.mode) << ',' << Num(threshold.ctc_lambda) << ','
       << Num(threshold.hat_lambda) << ',' << Num(s.Nbp()) << ',' << Num(s.Jcr()) << ','
       << Num(s.decode_seconds) << ',' << Num(s.audio_seconds) << '\n';
  }
  return os.str();
}

std::string SummaryCsv(const EvalSummary &summary, const DecodeConfig &config,
                       const ThresholdConfig &threshold, std::uint64_t config_hash) {
  std::ostringstream os;
  os << Preamble(config_hash, "wer,algorithm,mode,lambda_ctc,lambda_hat,nbp,jcr,rtf,"
                              "substitutions,insertions,deletions,ref_tokens,oracle_nbp");
  os << Num(summary.wer) << ',' << ToString(config.algorithm) << ','
     << ToString(threshold.mode) << ',' << Num(threshold.ctc_lambda) << ','
     << Num(threshold.hat_lambda) << ',' << Num(summary.nbp) << ',' << Num(summary.jcr)
     << ',' << Num(summary.rtf) << ',' << summary.substitutions << ',' << summary.insertions
     << ',' << summary.deletions << ',' << summary.reference_tokens << ','
     << Num(summary.oracle_nbp) << '\n';
  return os.str();
}

std::string SweepCurveCsv(const std::vector<SweepPoint> &points, std::uint64_t config_hash) {
  std::ostringstream os;
  os << Preamble(config_hash, "mode,lambda_ctc,lambda_hat,wer,nbp,jcr,rtf");
  for (const SweepPoint &p : points)
    os << ToString(p.threshold.mode) << ',' << Num(p.threshold.ctc_lambda) << ','
       << Num(p.threshold.hat_lambda) << ',' << Num(p.summary.wer) << ','
       << Num(p.summary.nbp) << ',' << Num(p.summary.jcr) << ',' << Num(p.summary.rtf)
       << '\n';
  return os.str();
}

std::vector<double> SweepGrid() {
  std::vector<double> grid;
  for (int v = 0; v <= 16; v += 2) grid.push_back(v);
  return grid;
}

}  // namespace trlab
