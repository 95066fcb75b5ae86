// src/data.cc

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

#include "data.h"

#include <cstdio>
#include <random>

#include "bytes.h"
#include "error.h"
#include "loss.h"
#include "parallel.h"

namespace trlab {

const char *ToString(Split split) {
  switch (split) {
    case Split::kTrain: return "train";
    case Split::kDev: return "dev";
    case Split::kTest: return "test";
  }
  return "?";
}

Split ParseSplit(const std::string &name) {
  if (name == "train") return Split::kTrain;
  if (name == "dev") return Split::kDev;
  if (name == "test") return Split::kTest;
  Fail(ErrorCode::kInvalidArgument, "unknown split '" + name + "'");
}

const std::vector<Utterance> &Dataset::split(Split s) const {
  return s == Split::kTrain ? train : s == Split::kDev ? dev : test;
}

std::vector<Utterance> &Dataset::split(Split s) {
  return s == Split::kTrain ? train : s == Split::kDev ? dev : test;
}

void Validate(const SyntheticTaskConfig &c) {
  auto bad = [](const std::string &m) { Fail(ErrorCode::kInvalidArgument, m); };
  if (c.vocab_size < 3) bad("synthetic task needs vocab_size >= 3");
  if (c.feat_dim == 0) bad("feat_dim must be positive");
  if (c.min_duration < 1 || c.min_duration > c.max_duration) bad("bad token duration range");
  if (!(c.noise >= 0.0)) bad("noise must be >= 0");
  if (c.min_tokens > c.max_tokens) bad("bad token count range");
  if (!(c.silence_prob >= 0.0 && c.silence_prob <= 1.0)) bad("silence_prob must be in [0,1]");
  if (c.min_silence > c.max_silence) bad("bad silence duration range");
  if (c.stride == 0) bad("stride must be positive");
}

namespace {

std::uint64_t SplitMix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t UtteranceSeed(std::uint64_t seed, Split split, std::size_t index) {
  return SplitMix64(SplitMix64(seed ^ (0x51ed2705ULL + static_cast<std::uint64_t>(split))) +
                    index);
}

std::size_t Uniform(std::mt19937_64 &rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

Utterance Synthesize(const SyntheticTaskConfig &c, const Matrix &templates,
                     Split split, std::size_t index) {
  const std::uint64_t seed = UtteranceSeed(c.seed, split, index);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::bernoulli_distribution silence(c.silence_prob);
  constexpr int kMaxAttempts = 32;
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    const std::size_t n = Uniform(rng, c.min_tokens, c.max_tokens);
    std::vector<Token> tokens;
    while (tokens.size() < n) {
      const Token k = static_cast<Token>(Uniform(rng, 1, c.vocab_size - 1));
      if (!tokens.empty() && tokens.back() == k) continue;
      tokens.push_back(k);
    }
    // Segment list of (template row, frame count).
    std::vector<std::pair<std::size_t, std::size_t>> segments;
    for (std::size_t i = 0; i <= n; ++i) {
      if (silence(rng)) segments.emplace_back(0, Uniform(rng, c.min_silence, c.max_silence));
      if (i < n) segments.emplace_back(tokens[i], Uniform(rng, c.min_duration, c.max_duration));
    }
    std::size_t frames = 0;
    for (const auto &s : segments) frames += s.second;
    if (frames == 0 || EncoderFrames(frames, c.stride) < CtcMinimumFrames(tokens)) continue;

    Utterance u;
    char id[64];
    std::snprintf(id, sizeof(id), "%s-%06zu-%08llx", ToString(split), index,
                  static_cast<unsigned long long>(seed >> 32));
    u.id = id;
    u.reference = std::move(tokens);
    u.features = Matrix(frames, c.feat_dim);
    std::size_t row = 0;
    for (const auto &[tmpl, len] : segments) {
      for (std::size_t f = 0; f < len; ++f, ++row) {
        for (std::size_t d = 0; d < c.feat_dim; ++d) {
          double v = templates(tmpl, d);
          if (c.noise > 0.0) v += c.noise * noise(rng);
          u.features(row, d) = v;
        }
      }
    }
    return u;
  }
  Fail(ErrorCode::kInvalidArgument,
       "could not generate a CTC-admissible utterance; check durations and stride");
}

}  // namespace

Matrix TokenTemplates(const SyntheticTaskConfig &c) {
  std::mt19937_64 rng(SplitMix64(c.seed));
  std::normal_distribution<double> dist(0.0, 1.0);
  Matrix t(c.vocab_size, c.feat_dim);
  for (std::size_t k = 1; k < c.vocab_size; ++k)
    for (std::size_t d = 0; d < c.feat_dim; ++d) t(k, d) = dist(rng);
  return t;
}

Dataset Generate(const SyntheticTaskConfig &c, unsigned jobs) {
  Validate(c);
  const Matrix templates = TokenTemplates(c);
  Dataset ds;
  ds.feat_dim = c.feat_dim;
  ds.vocab_size = c.vocab_size;
  const std::pair<Split, std::size_t> plan[] = {
      {Split::kTrain, c.train_count}, {Split::kDev, c.dev_count}, {Split::kTest, c.test_count}};
  for (const auto &[split, count] : plan) {
    std::vector<Utterance> &out = ds.split(split);
    out.resize(count);
    ParallelFor(count, jobs, [&](std::size_t i) {
      out[i] = Synthesize(c, templates, split, i);
    });
  }
  return ds;
}

std::vector<std::uint8_t> SerializeDataset(const Dataset &ds) {
  ByteWriter w;
  w.Raw(kDatasetMagic);
  w.U32(kDatasetVersion);
  w.U32(static_cast<std::uint32_t>(ds.feat_dim));
  w.U32(static_cast<std::uint32_t>(ds.vocab_size));
  w.Str(ds.metadata);
  w.U64(ds.size());
  for (Split split : {Split::kTrain, Split::kDev, Split::kTest}) {
    for (const Utterance &u : ds.split(split)) {
      if (u.features.cols != ds.feat_dim)
        Fail(ErrorCode::kInvalidArgument, "utterance feature dim differs from dataset");
      ByteWriter rec;
      rec.U8(static_cast<std::uint8_t>(split));
      rec.Str(u.id);
      rec.U32(static_cast<std::uint32_t>(u.features.rows));
      rec.U32(static_cast<std::uint32_t>(u.reference.size()));
      for (Token t : u.reference) rec.U32(t);
      for (double v : u.features.data) rec.F64(v);
      w.U64(rec.size());
      w.Raw({reinterpret_cast<const char *>(rec.bytes().data()), rec.size()});
    }
  }
  w.U64(Fnv1a(w.bytes()));
  return std::move(w.bytes());
}

Dataset DeserializeDataset(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 8) Fail(ErrorCode::kFormat, "truncated dataset file");
  ByteReader r(bytes);
  if (r.Raw(7) != kDatasetMagic) Fail(ErrorCode::kFormat, "not a trlab dataset");
  const std::uint32_t version = r.U32();
  if (version != kDatasetVersion)
    Fail(ErrorCode::kFormat, "unsupported dataset version " + std::to_string(version));
  {
    const auto body = bytes.first(bytes.size() - 8);
    ByteReader tail(bytes.last(8));
    if (Fnv1a(body) != tail.U64()) Fail(ErrorCode::kFormat, "dataset checksum mismatch");
  }
  Dataset ds;
  ds.feat_dim = r.U32();
  ds.vocab_size = r.U32();
  ds.metadata = r.Str();
  const std::uint64_t count = r.U64();
  for (std::uint64_t i = 0; i < count; ++i) {
    const std::uint64_t len = r.U64();
    const std::size_t start = r.offset();
    const std::uint8_t split = r.U8();
    if (split > 2) Fail(ErrorCode::kFormat, "bad split tag in dataset record");
    Utterance u;
    u.id = r.Str();
    const std::uint32_t frames = r.U32();
    const std::uint32_t n = r.U32();
    for (std::uint32_t k = 0; k < n; ++k) {
      const Token t = r.U32();
      if (t == 0 || t >= ds.vocab_size) Fail(ErrorCode::kFormat, "bad token in dataset record");
      u.reference.push_back(t);
    }
    u.features = Matrix(frames, ds.feat_dim);
    for (double &v : u.features.data) v = r.F64();
    if (r.offset() - start != len) Fail(ErrorCode::kFormat, "dataset record length mismatch");
    ds.split(static_cast<Split>(split)).push_back(std::move(u));
  }
  if (r.remaining() != 8) Fail(ErrorCode::kFormat, "trailing bytes in dataset file");
  return ds;
}

void SaveDataset(const Dataset &dataset, const std::string &path) {
  WriteFileBytes(path, SerializeDataset(dataset));
}

Dataset LoadDataset(const std::string &path) { return DeserializeDataset(ReadFileBytes(path)); }

}  // namespace trlab
