// src/bytes.h

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

#ifndef TRLAB_BYTES_H_
#define TRLAB_BYTES_H_

#include <bit>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "error.h"

namespace trlab {

// Little-endian encoder for the checkpoint and dataset containers.
class ByteWriter {
 public:
  void U8(std::uint8_t v) { buf_.push_back(v); }
  void U32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void U64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void F64(double v) { U64(std::bit_cast<std::uint64_t>(v)); }
  void Raw(std::string_view s) { buf_.insert(buf_.end(), s.begin(), s.end()); }
  void Str(std::string_view s) {
    U32(static_cast<std::uint32_t>(s.size()));
    Raw(s);
  }
  std::vector<std::uint8_t> &bytes() { return buf_; }
  std::size_t size() const { return buf_.size(); }

 private:
  std::vector<std::uint8_t> buf_;
};

// Bounds-checked decoder; every overrun is reported as a format error.
class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> data) : data_(data) {}

  std::uint8_t U8() { return Take(1)[0]; }
  std::uint32_t U32() {
    auto b = Take(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
    return v;
  }
  std::uint64_t U64() {
    auto b = Take(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
  }
  double F64() { return std::bit_cast<double>(U64()); }
  std::string Raw(std::size_t n) {
    auto b = Take(n);
    return std::string(b.begin(), b.end());
  }
  std::string Str() { return Raw(U32()); }
  std::size_t offset() const { return pos_; }
  std::size_t remaining() const { return data_.size() - pos_; }

 private:
  std::span<const std::uint8_t> Take(std::size_t n) {
    if (n > remaining()) Fail(ErrorCode::kFormat, "truncated file");
    auto out = data_.subspan(pos_, n);
    pos_ += n;
    return out;
  }

  std::span<const std::uint8_t> data_;
  std::size_t pos_ = 0;
};

// 64-bit FNV-1a.
inline std::uint64_t Fnv1a(std::span<const std::uint8_t> data,
                           std::uint64_t hash = 0xcbf29ce484222325ULL) {
  for (std::uint8_t b : data) {
    hash ^= b;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

inline std::uint64_t Fnv1a(std::string_view s) {
  return Fnv1a({reinterpret_cast<const std::uint8_t *>(s.data()), s.size()});
}

std::vector<std::uint8_t> ReadFileBytes(const std::string &path);
// Writes to a sibling temporary file and renames it into place, so a failed
// write never leaves a partial artifact behind.
void WriteFileBytes(const std::string &path, std::span<const std::uint8_t> bytes);

}  // namespace trlab

#endif  // TRLAB_BYTES_H_
