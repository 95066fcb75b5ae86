// tests/test_capi.cpp

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

// Exercises the shared library through its C header only.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "trlab/trlab.h"

namespace {

std::string TempPath(const std::string &name) {
  return (std::filesystem::temp_directory_path() / ("trlab_capi_" + name)).string();
}

std::string ReadText(const std::string &path) {
  std::ifstream in(path);
  return {std::istreambuf_iterator<char>(in), {}};
}

trlab_dataset *TinyDataset() {
  trlab_data_config c;
  trlab_data_config_default(&c);
  c.vocab_size = 5;
  c.feat_dim = 4;
  c.train_count = 8;
  c.dev_count = 3;
  c.test_count = 4;
  trlab_dataset *d = nullptr;
  REQUIRE(trlab_dataset_generate(&c, 2, &d) == TRLAB_OK);
  return d;
}

trlab_model *TinyModel() {
  trlab_model_config c;
  trlab_model_config_default(&c);
  c.vocab_size = 5;
  c.feat_dim = 4;
  c.hidden_dim = 8;
  c.joint_dim = 8;
  trlab_model *m = nullptr;
  REQUIRE(trlab_model_create(&c, 9, &m) == TRLAB_OK);
  return m;
}

}  // namespace

TEST_CASE("defaults mirror the documented configuration") {
  trlab_model_config m;
  trlab_model_config_default(&m);
  CHECK(m.mode == TRLAB_HAT);
  CHECK(m.ctc_head == TRLAB_HEAD_IAM);
  CHECK(m.vocab_size == 17);
  trlab_train_config t;
  trlab_train_config_default(&t);
  CHECK(t.alpha == 0.75);
  CHECK(t.beta == 0.1);
  trlab_decode_config d;
  trlab_decode_config_default(&d);
  CHECK(d.beam == 8);
  CHECK(d.algorithm == TRLAB_ALSD);
  CHECK(d.threshold_mode == TRLAB_THRESHOLD_NONE);
  CHECK(std::string(trlab_version()).size() > 0);
  CHECK(trlab_hash("", 0) == 0xcbf29ce484222325ULL);
}

TEST_CASE("errors map to status codes") {
  trlab_dataset *d = nullptr;
  CHECK(trlab_dataset_load(nullptr, &d) == TRLAB_ERR_INVALID_ARGUMENT);
  CHECK(std::string(trlab_last_error()).find("null") != std::string::npos);
  CHECK(trlab_dataset_load(TempPath("missing.trds").c_str(), &d) == TRLAB_ERR_IO);
  CHECK(d == nullptr);

  const std::string junk = TempPath("junk.trds");
  std::ofstream(junk) << "definitely not a dataset";
  CHECK(trlab_dataset_load(junk.c_str(), &d) == TRLAB_ERR_FORMAT);
  std::filesystem::remove(junk);

  trlab_model_config mc;
  trlab_model_config_default(&mc);
  mc.vocab_size = 1;
  trlab_model *m = nullptr;
  CHECK(trlab_model_create(&mc, 1, &m) != TRLAB_OK);
  CHECK(m == nullptr);
  mc.vocab_size = 17;
  mc.mode = static_cast<trlab_transducer>(7);
  CHECK(trlab_model_create(&mc, 1, &m) == TRLAB_ERR_INVALID_ARGUMENT);

  trlab_model_config_default(&mc);
  mc.mode = TRLAB_RNNT;
  REQUIRE(trlab_model_create(&mc, 1, &m) == TRLAB_OK);
  trlab_dataset *data = nullptr;
  trlab_data_config dc;
  trlab_data_config_default(&dc);
  dc.train_count = 2;
  dc.dev_count = dc.test_count = 2;
  REQUIRE(trlab_dataset_generate(&dc, 1, &data) == TRLAB_OK);
  trlab_decode_config cfg;
  trlab_decode_config_default(&cfg);
  cfg.threshold_mode = TRLAB_THRESHOLD_HAT;
  trlab_decode_result *r = nullptr;
  CHECK(trlab_decode(m, data, TRLAB_SPLIT_TEST, &cfg, 1, &r) == TRLAB_ERR_UNSUPPORTED);
  CHECK(r == nullptr);
  trlab_model_free(m);
  trlab_dataset_free(data);
  trlab_model_free(nullptr);
  trlab_dataset_free(nullptr);
  trlab_decode_result_free(nullptr);
}

TEST_CASE("generate, train, save, load and decode") {
  trlab_dataset *data = TinyDataset();
  CHECK(trlab_dataset_size(data, TRLAB_SPLIT_TRAIN) == 8);
  CHECK(trlab_dataset_size(data, TRLAB_SPLIT_TEST) == 4);
  CHECK(trlab_dataset_vocab_size(data) == 5);
  const uint32_t *ref = nullptr;
  size_t n = 0;
  REQUIRE(trlab_dataset_reference(data, TRLAB_SPLIT_TEST, 0, &ref, &n) == TRLAB_OK);
  CHECK(n >= 3);
  CHECK(trlab_dataset_reference(data, TRLAB_SPLIT_TEST, 99, &ref, &n) ==
        TRLAB_ERR_INVALID_ARGUMENT);
  double oracle = 0.0;
  REQUIRE(trlab_dataset_oracle_nbp(data, TRLAB_SPLIT_TRAIN, 2, &oracle) == TRLAB_OK);
  CHECK(oracle > 0.0);
  CHECK(oracle < 100.0);

  const std::string data_path = TempPath("data.trds");
  REQUIRE(trlab_dataset_set_metadata(data, "capi") == TRLAB_OK);
  REQUIRE(trlab_dataset_save(data, data_path.c_str()) == TRLAB_OK);
  trlab_dataset *loaded = nullptr;
  REQUIRE(trlab_dataset_load(data_path.c_str(), &loaded) == TRLAB_OK);
  CHECK(std::string(trlab_dataset_metadata(loaded)) == "capi");

  trlab_model *model = TinyModel();
  trlab_train_config tc;
  trlab_train_config_default(&tc);
  tc.epochs = 2;
  int calls = 0;
  auto cb = [](const trlab_epoch_record *r, void *user) {
    ++*static_cast<int *>(user);
    CHECK(r->joint > 0.0);
  };
  trlab_train_summary summary{};
  REQUIRE(trlab_model_train(model, loaded, &tc, cb, &calls, &summary) == TRLAB_OK);
  CHECK(calls == 4);
  const std::string trace = TempPath("trace.csv");
  REQUIRE(trlab_model_write_loss_trace(model, trace.c_str(), 0xabcULL) == TRLAB_OK);
  const std::string trace_text = ReadText(trace);
  CHECK(trace_text.rfind("# config_hash=0000000000000abc\n", 0) == 0);
  CHECK(trace_text.find("epoch,split,L_RNNT,L_CTC,L_ILM,L_Joint") != std::string::npos);

  const std::string model_path = TempPath("model.ckpt");
  REQUIRE(trlab_model_set_metadata(model, "m") == TRLAB_OK);
  REQUIRE(trlab_model_save(model, model_path.c_str()) == TRLAB_OK);
  trlab_model *reloaded = nullptr;
  REQUIRE(trlab_model_load(model_path.c_str(), &reloaded) == TRLAB_OK);
  CHECK(std::string(trlab_model_metadata(reloaded)) == "m");
  CHECK(trlab_model_parameter_count(reloaded) == trlab_model_parameter_count(model));
  trlab_model_config got;
  REQUIRE(trlab_model_get_config(reloaded, &got) == TRLAB_OK);
  CHECK(got.hidden_dim == 8);

  trlab_decode_config cfg;
  trlab_decode_config_default(&cfg);
  trlab_decode_result *a = nullptr, *b = nullptr;
  REQUIRE(trlab_decode(model, loaded, TRLAB_SPLIT_TEST, &cfg, 1, &a) == TRLAB_OK);
  REQUIRE(trlab_decode(reloaded, loaded, TRLAB_SPLIT_TEST, &cfg, 3, &b) == TRLAB_OK);
  REQUIRE(trlab_decode_result_size(a) == 4);
  for (size_t i = 0; i < 4; ++i) {
    trlab_utterance_result ua, ub;
    REQUIRE(trlab_decode_result_utterance(a, i, &ua) == TRLAB_OK);
    REQUIRE(trlab_decode_result_utterance(b, i, &ub) == TRLAB_OK);
    CHECK(std::string(ua.id) == ub.id);
    CHECK(std::vector<uint32_t>(ua.tokens, ua.tokens + ua.token_count) ==
          std::vector<uint32_t>(ub.tokens, ub.tokens + ub.token_count));
    CHECK(ua.log_score == ub.log_score);
    CHECK(ua.kept_frames == ua.encoder_frames);
  }
  trlab_summary s;
  REQUIRE(trlab_decode_result_summary(a, &s) == TRLAB_OK);
  CHECK(s.nbp == 100.0);
  CHECK(s.jcr == 100.0);
  CHECK(s.reference_tokens > 0);

  const std::string report = TempPath("report.csv"), sum = TempPath("summary.csv"),
                    curve = TempPath("curve.csv");
  REQUIRE(trlab_decode_result_write_report(a, report.c_str(), 1) == TRLAB_OK);
  REQUIRE(trlab_decode_result_write_summary(a, sum.c_str(), 1) == TRLAB_OK);
  const trlab_decode_result *both[] = {a, b};
  REQUIRE(trlab_write_sweep_curve(both, 2, curve.c_str(), 1) == TRLAB_OK);
  CHECK(ReadText(report).find("id,transcript,reference,algorithm,mode") != std::string::npos);
  CHECK(ReadText(sum).find("wer,algorithm,mode,lambda_ctc,lambda_hat,nbp,jcr,rtf") !=
        std::string::npos);
  std::string curve_text = ReadText(curve);
  CHECK(std::count(curve_text.begin(), curve_text.end(), '\n') == 4);

  trlab_decode_result_free(a);
  trlab_decode_result_free(b);
  trlab_model_free(model);
  trlab_model_free(reloaded);
  trlab_dataset_free(data);
  trlab_dataset_free(loaded);
  for (const std::string &p : {data_path, trace, model_path, report, sum, curve})
    std::filesystem::remove(p);
}
