// src/data.h

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

#ifndef TRLAB_DATA_H_
#define TRLAB_DATA_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "model.h"

namespace trlab {

// Frame period of the synthetic features, in seconds.
inline constexpr double kFrameSeconds = 0.01;

struct SyntheticTaskConfig {
  std::size_t vocab_size = 17;  // including blank
  std::size_t feat_dim = 8;
  std::size_t min_duration = 3;  // frames per token
  std::size_t max_duration = 8;
  double noise = 0.3;  // std-dev of additive Gaussian noise
  std::size_t min_tokens = 3;
  std::size_t max_tokens = 8;
  // Probability of a silence segment in each gap (before, between, after
  // tokens), and its length range in frames.
  double silence_prob = 0.5;
  std::size_t min_silence = 4;
  std::size_t max_silence = 12;
  std::size_t train_count = 400;
  std::size_t dev_count = 50;
  std::size_t test_count = 50;
  // Encoder stride used for the CTC admissibility check.
  std::size_t stride = 2;
  std::uint64_t seed = 1;
};

void Validate(const SyntheticTaskConfig &config);

struct Utterance {
  std::string id;
  Matrix features;  // T' x feat_dim
  std::vector<Token> reference;

  double audio_seconds() const { return features.rows * kFrameSeconds; }
  bool operator==(const Utterance &) const = default;
};

enum class Split : std::uint8_t { kTrain = 0, kDev = 1, kTest = 2 };
const char *ToString(Split split);
Split ParseSplit(const std::string &name);

struct Dataset {
  std::size_t feat_dim = 0;
  std::size_t vocab_size = 0;
  std::string metadata;
  std::vector<Utterance> train, dev, test;

  const std::vector<Utterance> &split(Split s) const;
  std::vector<Utterance> &split(Split s);
  std::size_t size() const { return train.size() + dev.size() + test.size(); }
  bool operator==(const Dataset &) const = default;
};

// Each label token owns a fixed random template vector; an utterance repeats
// the template of each token for a random duration, optionally separated by
// silence (zero template), plus Gaussian noise. Adjacent tokens are always
// distinct. Deterministic in config.seed regardless of `jobs`.
Dataset Generate(const SyntheticTaskConfig &config, unsigned jobs = 1);

// Token templates used by Generate, row k for token k (row 0 is silence).
Matrix TokenTemplates(const SyntheticTaskConfig &config);

inline constexpr char kDatasetMagic[] = "TRLABDS";
inline constexpr std::uint32_t kDatasetVersion = 1;

// Layout: magic "TRLABDS", u32 version, u32 feat_dim, u32 vocab_size,
// str metadata, u64 record count; per record a u64 payload length followed by
// u8 split, str id, u32 frames, u32 U, U x u32 tokens, frames*feat_dim f64;
// finally a u64 FNV-1a checksum of every preceding byte.
std::vector<std::uint8_t> SerializeDataset(const Dataset &dataset);
Dataset DeserializeDataset(std::span<const std::uint8_t> bytes);
void SaveDataset(const Dataset &dataset, const std::string &path);
Dataset LoadDataset(const std::string &path);

// Encoder frames for an utterance of `input_frames` frames.
inline std::size_t EncoderFrames(std::size_t input_frames, std::size_t stride) {
  return (input_frames + stride - 1) / stride;
}

}  // namespace trlab

#endif  // TRLAB_DATA_H_
