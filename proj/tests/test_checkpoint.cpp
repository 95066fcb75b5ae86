// tests/test_checkpoint.cpp

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

#include <doctest.h>

#include <filesystem>

#include "checkpoint.h"
#include "error.h"

using namespace trlab;

TEST_SUITE("checkpoint") {

TEST_CASE("every architecture round-trips bit-exactly") {
  for (TransducerMode mode : {TransducerMode::kRnnt, TransducerMode::kHat}) {
    for (CtcHead head : {CtcHead::kNone, CtcHead::kCtc, CtcHead::kFctc, CtcHead::kIam}) {
      ModelConfig c;
      c.mode = mode;
      c.ctc_head = head;
      c.hidden_dim = 6;
      c.joint_dim = 5;
      c.encoder_layers = 2;
      c.causal = head == CtcHead::kCtc;
      const Model m(c, 42);
      const auto bytes = SerializeCheckpoint(m, "meta");
      const LoadedCheckpoint back = DeserializeCheckpoint(bytes);
      CHECK(back.model.config() == m.config());
      CHECK(back.model.params() == m.params());
      CHECK(back.metadata == "meta");
      CHECK(SerializeCheckpoint(back.model, "meta") == bytes);
    }
  }
}

TEST_CASE("files round-trip") {
  const Model m(ModelConfig{}, 3);
  const std::string path =
      (std::filesystem::temp_directory_path() / "trlab_test_model.ckpt").string();
  SaveCheckpoint(m, path, "x");
  const LoadedCheckpoint back = LoadCheckpoint(path);
  CHECK(back.model.params() == m.params());
  std::filesystem::remove(path);
}

TEST_CASE("corrupt checkpoints are rejected") {
  const auto good = SerializeCheckpoint(Model(ModelConfig{}, 3));
  auto expect_format = [](std::vector<std::uint8_t> bytes) {
    try {
      DeserializeCheckpoint(bytes);
      FAIL("expected a format error");
    } catch (const Error &e) {
      CHECK(e.code() == ErrorCode::kFormat);
    }
  };
  auto magic = good;
  magic[1] = 'x';
  expect_format(magic);
  auto version = good;
  version[5] = 7;
  expect_format(version);
  expect_format({good.begin(), good.end() - 3});
  auto trailing = good;
  trailing.push_back(0);
  expect_format(trailing);
}

TEST_CASE("different seeds give different parameters") {
  CHECK_FALSE(Model(ModelConfig{}, 1).params() == Model(ModelConfig{}, 2).params());
  CHECK(Model(ModelConfig{}, 1).params() == Model(ModelConfig{}, 1).params());
}

}  // TEST_SUITE
