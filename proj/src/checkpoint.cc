// src/checkpoint.cc

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

#include "checkpoint.h"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>

#include "bytes.h"
#include "error.h"

namespace trlab {

std::vector<std::uint8_t> ReadFileBytes(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail(ErrorCode::kIo, "cannot open '" + path + "' for reading");
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), {});
}

void WriteFileBytes(const std::string &path, std::span<const std::uint8_t> bytes) {
  const std::string tmp = path + ".partial";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) Fail(ErrorCode::kIo, "cannot open '" + path + "' for writing");
    out.write(reinterpret_cast<const char *>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) {
      out.close();
      std::remove(tmp.c_str());
      Fail(ErrorCode::kIo, "write failed for '" + path + "'");
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::remove(tmp.c_str());
    Fail(ErrorCode::kIo, "cannot move checkpoint into place: " + ec.message());
  }
}

std::vector<std::uint8_t> SerializeCheckpoint(const Model &model,
                                              const std::string &metadata) {
  const ModelConfig &c = model.config();
  ByteWriter w;
  w.Raw(kCheckpointMagic);
  w.U32(kCheckpointVersion);
  w.U8(static_cast<std::uint8_t>(c.mode));
  w.U8(static_cast<std::uint8_t>(c.ctc_head));
  w.U32(static_cast<std::uint32_t>(c.feat_dim));
  w.U32(static_cast<std::uint32_t>(c.hidden_dim));
  w.U32(static_cast<std::uint32_t>(c.joint_dim));
  w.U32(static_cast<std::uint32_t>(c.encoder_layers));
  w.U32(static_cast<std::uint32_t>(c.vocab_size));
  w.U32(c.blank_id);
  w.U32(static_cast<std::uint32_t>(c.stride));
  w.U8(c.causal ? 1 : 0);
  w.Str(metadata);
  const ParameterSet &p = model.params();
  w.U32(static_cast<std::uint32_t>(p.count()));
  for (const Tensor &t : p.tensors()) {
    w.Str(t.name);
    w.U32(static_cast<std::uint32_t>(t.value.rows));
    w.U32(static_cast<std::uint32_t>(t.value.cols));
    for (double v : t.value.data) w.F64(v);
  }
  return std::move(w.bytes());
}

LoadedCheckpoint DeserializeCheckpoint(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  if (r.Raw(5) != kCheckpointMagic) Fail(ErrorCode::kFormat, "not a trlab checkpoint");
  const std::uint32_t version = r.U32();
  if (version != kCheckpointVersion)
    Fail(ErrorCode::kFormat, "unsupported checkpoint version " + std::to_string(version));
  ModelConfig c;
  const std::uint8_t mode = r.U8();
  const std::uint8_t head = r.U8();
  if (mode > 1 || head > 3) Fail(ErrorCode::kFormat, "bad mode or ctc_head in checkpoint");
  c.mode = static_cast<TransducerMode>(mode);
  c.ctc_head = static_cast<CtcHead>(head);
  c.feat_dim = r.U32();
  c.hidden_dim = r.U32();
  c.joint_dim = r.U32();
  c.encoder_layers = r.U32();
  c.vocab_size = r.U32();
  c.blank_id = r.U32();
  c.stride = r.U32();
  c.causal = r.U8() != 0;
  std::string metadata = r.Str();
  try {
    Validate(c);
  } catch (const Error &e) {
    Fail(ErrorCode::kFormat, std::string("invalid checkpoint header: ") + e.what());
  }
  ParameterSet expected = MakeParameterSet(c, nullptr);
  const std::uint32_t count = r.U32();
  if (count != expected.count()) Fail(ErrorCode::kFormat, "checkpoint tensor count mismatch");
  for (std::size_t i = 0; i < count; ++i) {
    const std::string name = r.Str();
    const std::uint32_t rows = r.U32();
    const std::uint32_t cols = r.U32();
    Matrix &m = expected[i];
    if (name != expected.name(i) || rows != m.rows || cols != m.cols)
      Fail(ErrorCode::kFormat, "unexpected tensor '" + name + "' in checkpoint");
    for (double &v : m.data) v = r.F64();
  }
  if (r.remaining() != 0) Fail(ErrorCode::kFormat, "trailing bytes after checkpoint");
  return {Model(c, std::move(expected)), std::move(metadata)};
}

void SaveCheckpoint(const Model &model, const std::string &path,
                    const std::string &metadata) {
  WriteFileBytes(path, SerializeCheckpoint(model, metadata));
}

LoadedCheckpoint LoadCheckpoint(const std::string &path) {
  return DeserializeCheckpoint(ReadFileBytes(path));
}

}  // namespace trlab
