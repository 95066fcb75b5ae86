// src/checkpoint.h

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

#ifndef TRLAB_CHECKPOINT_H_
#define TRLAB_CHECKPOINT_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "model.h"

namespace trlab {

inline constexpr char kCheckpointMagic[] = "TRLAB";
inline constexpr std::uint32_t kCheckpointVersion = 1;

// Layout: magic "TRLAB", u32 version, u8 mode, u8 ctc_head, u32 feat_dim,
// u32 hidden_dim, u32 joint_dim, u32 encoder_layers, u32 vocab_size,
// u32 blank_id, u32 stride, u8 causal, str metadata, u32 tensor count, then
// per tensor: str name, u32 rows, u32 cols, rows*cols little-endian f64.
// Strings are u32 length followed by bytes.
std::vector<std::uint8_t> SerializeCheckpoint(const Model &model,
                                              const std::string &metadata = {});

struct LoadedCheckpoint {
  Model model;
  std::string metadata;
};

LoadedCheckpoint DeserializeCheckpoint(std::span<const std::uint8_t> bytes);

void SaveCheckpoint(const Model &model, const std::string &path,
                    const std::string &metadata = {});
LoadedCheckpoint LoadCheckpoint(const std::string &path);

}  // namespace trlab

#endif  // TRLAB_CHECKPOINT_H_
