// src/capi.cc

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

#include "trlab/trlab.h"

#include <exception>
#include <memory>
#include <new>
#include <optional>
#include <string>
#include <vector>

#include "bytes.h"
#include "checkpoint.h"
#include "data.h"
#include "decode.h"
#include "error.h"
#include "metrics.h"
#include "report.h"
#include "train.h"

struct trlab_dataset {
  trlab::Dataset data;
};

struct trlab_model {
  std::optional<trlab::Model> model;
  std::string metadata;
  std::vector<trlab::EpochRecord> trace;
};

struct trlab_decode_result {
  std::vector<trlab::Utterance> utterances;  // ids and references only
  trlab::CorpusResult corpus;
  trlab::DecodeConfig config;
  trlab::ThresholdConfig threshold;
  trlab::Vocabulary vocab;
};

namespace {

thread_local std::string g_last_error;

trlab_status ToStatus(trlab::ErrorCode code) {
  switch (code) {
    case trlab::ErrorCode::kInvalidArgument: return TRLAB_ERR_INVALID_ARGUMENT;
    case trlab::ErrorCode::kUnsupportedOperation: return TRLAB_ERR_UNSUPPORTED;
    case trlab::ErrorCode::kPrecondition: return TRLAB_ERR_PRECONDITION;
    case trlab::ErrorCode::kConfig: return TRLAB_ERR_CONFIG;
    case trlab::ErrorCode::kFormat: return TRLAB_ERR_FORMAT;
    case trlab::ErrorCode::kIo: return TRLAB_ERR_IO;
    case trlab::ErrorCode::kNumeric: return TRLAB_ERR_NUMERIC;
  }
  return TRLAB_ERR_INTERNAL;
}

template <typename Fn>
trlab_status Guard(Fn &&fn) {
  try {
    fn();
    g_last_error.clear();
    return TRLAB_OK;
  } catch (const trlab::Error &e) {
    g_last_error = e.what();
    return ToStatus(e.code());
  } catch (const std::bad_alloc &) {
    g_last_error = "out of memory";
  } catch (const std::exception &e) {
    g_last_error = e.what();
  } catch (...) {
    g_last_error = "unknown error";
  }
  return TRLAB_ERR_INTERNAL;
}

void Require(bool ok, const char *what) {
  if (!ok) trlab::Fail(trlab::ErrorCode::kInvalidArgument, std::string(what) + " is null");
}

trlab::Split ToSplit(trlab_split split) {
  switch (split) {
    case TRLAB_SPLIT_TRAIN: return trlab::Split::kTrain;
    case TRLAB_SPLIT_DEV: return trlab::Split::kDev;
    case TRLAB_SPLIT_TEST: return trlab::Split::kTest;
  }
  trlab::Fail(trlab::ErrorCode::kInvalidArgument, "unknown split");
}

template <typename E>
E CheckEnum(int value, int max, const char *what) {
  if (value < 0 || value > max)
    trlab::Fail(trlab::ErrorCode::kInvalidArgument, std::string("unknown ") + what);
  return static_cast<E>(value);
}

trlab::ModelConfig ToModelConfig(const trlab_model_config &c) {
  trlab::ModelConfig m;
  m.mode = CheckEnum<trlab::TransducerMode>(c.mode, 1, "transducer mode");
  m.ctc_head = CheckEnum<trlab::CtcHead>(c.ctc_head, 3, "ctc head");
  m.feat_dim = c.feat_dim;
  m.hidden_dim = c.hidden_dim;
  m.joint_dim = c.joint_dim;
  m.encoder_layers = c.encoder_layers;
  m.vocab_size = c.vocab_size;
  m.stride = c.stride;
  m.causal = c.causal != 0;
  return m;
}

void WriteText(const char *path, const std::string &text) {
  Require(path != nullptr, "path");
  trlab::WriteFileBytes(path, {reinterpret_cast<const std::uint8_t *>(text.data()), text.size()});
}

void FillStats(const trlab::DecodeStats &s, uint64_t *encoder_frames, uint64_t *kept_frames,
               uint64_t *blank_calls, uint64_t *label_calls, double *decode_s,
               double *audio_s) {
  *encoder_frames = s.encoder_frames;
  *kept_frames = s.kept_frames;
  *blank_calls = s.blank_head_calls;
  *label_calls = s.label_head_calls;
  *decode_s = s.decode_seconds;
  *audio_s = s.audio_seconds;
}

}  // namespace

extern "C" {

const char *trlab_last_error(void) { return g_last_error.c_str(); }

const char *trlab_status_name(trlab_status status) {
  switch (status) {
    case TRLAB_OK: return "ok";
    case TRLAB_ERR_INVALID_ARGUMENT: return "invalid-argument";
    case TRLAB_ERR_UNSUPPORTED: return "unsupported-operation";
    case TRLAB_ERR_PRECONDITION: return "precondition";
    case TRLAB_ERR_CONFIG: return "config";
    case TRLAB_ERR_FORMAT: return "format";
    case TRLAB_ERR_IO: return "io";
    case TRLAB_ERR_NUMERIC: return "numeric";
    case TRLAB_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

const char *trlab_version(void) { return "0.1.0"; }

uint64_t trlab_hash(const void *data, size_t size) {
  return trlab::Fnv1a({static_cast<const std::uint8_t *>(data), data == nullptr ? 0 : size});
}

void trlab_data_config_default(trlab_data_config *config) {
  if (config == nullptr) return;
  const trlab::SyntheticTaskConfig d;
  config->vocab_size = static_cast<uint32_t>(d.vocab_size);
  config->feat_dim = static_cast<uint32_t>(d.feat_dim);
  config->min_duration = static_cast<uint32_t>(d.min_duration);
  config->max_duration = static_cast<uint32_t>(d.max_duration);
  config->noise = d.noise;
  config->min_tokens = static_cast<uint32_t>(d.min_tokens);
  config->max_tokens = static_cast<uint32_t>(d.max_tokens);
  config->silence_prob = d.silence_prob;
  config->min_silence = static_cast<uint32_t>(d.min_silence);
  config->max_silence = static_cast<uint32_t>(d.max_silence);
  config->train_count = static_cast<uint32_t>(d.train_count);
  config->dev_count = static_cast<uint32_t>(d.dev_count);
  config->test_count = static_cast<uint32_t>(d.test_count);
  config->stride = static_cast<uint32_t>(d.stride);
  config->seed = d.seed;
}

trlab_status trlab_dataset_generate(const trlab_data_config *config, unsigned jobs,
                                    trlab_dataset **out) {
  return Guard([&] {
    Require(config != nullptr, "config");
    Require(out != nullptr, "out");
    trlab::SyntheticTaskConfig c;
    c.vocab_size = config->vocab_size;
    c.feat_dim = config->feat_dim;
    c.min_duration = config->min_duration;
    c.max_duration = config->max_duration;
    c.noise = config->noise;
    c.min_tokens = config->min_tokens;
    c.max_tokens = config->max_tokens;
    c.silence_prob = config->silence_prob;
    c.min_silence = config->min_silence;
    c.max_silence = config->max_silence;
    c.train_count = config->train_count;
    c.dev_count = config->dev_count;
    c.test_count = config->test_count;
    c.stride = config->stride;
    c.seed = config->seed;
    *out = new trlab_dataset{trlab::Generate(c, jobs)};
  });
}

trlab_status trlab_dataset_load(const char *path, trlab_dataset **out) {
  return Guard([&] {
    Require(path != nullptr, "path");
    Require(out != nullptr, "out");
    *out = new trlab_dataset{trlab::LoadDataset(path)};
  });
}

trlab_status trlab_dataset_save(const trlab_dataset *dataset, const char *path) {
  return Guard([&] {
    Require(dataset != nullptr, "dataset");
    Require(path != nullptr, "path");
    trlab::SaveDataset(dataset->data, path);
  });
}

void trlab_dataset_free(trlab_dataset *dataset) { delete dataset; }

trlab_status trlab_dataset_set_metadata(trlab_dataset *dataset, const char *text) {
  return Guard([&] {
    Require(dataset != nullptr, "dataset");
    dataset->data.metadata = text == nullptr ? "" : text;
  });
}

const char *trlab_dataset_metadata(const trlab_dataset *dataset) {
  return dataset == nullptr ? "" : dataset->data.metadata.c_str();
}

size_t trlab_dataset_size(const trlab_dataset *dataset, trlab_split split) {
  if (dataset == nullptr || split < TRLAB_SPLIT_TRAIN || split > TRLAB_SPLIT_TEST) return 0;
  return dataset->data.split(static_cast<trlab::Split>(split)).size();
}

uint32_t trlab_dataset_feat_dim(const trlab_dataset *dataset) {
  return dataset == nullptr ? 0 : static_cast<uint32_t>(dataset->data.feat_dim);
}

uint32_t trlab_dataset_vocab_size(const trlab_dataset *dataset) {
  return dataset == nullptr ? 0 : static_cast<uint32_t>(dataset->data.vocab_size);
}

trlab_status trlab_dataset_reference(const trlab_dataset *dataset, trlab_split split,
                                     size_t index, const uint32_t **tokens, size_t *count) {
  return Guard([&] {
    Require(dataset != nullptr, "dataset");
    Require(tokens != nullptr && count != nullptr, "output");
    const auto &utts = dataset->data.split(ToSplit(split));
    if (index >= utts.size())
      trlab::Fail(trlab::ErrorCode::kInvalidArgument, "utterance index out of range");
    *tokens = utts[index].reference.data();
    *count = utts[index].reference.size();
  });
}

trlab_status trlab_dataset_oracle_nbp(const trlab_dataset *dataset, trlab_split split,
                                      uint32_t stride, double *percent) {
  return Guard([&] {
    Require(dataset != nullptr, "dataset");
    Require(percent != nullptr, "percent");
    *percent = trlab::OracleNbp(dataset->data.split(ToSplit(split)), stride);
  });
}

void trlab_model_config_default(trlab_model_config *config) {
  if (config == nullptr) return;
  const trlab::ModelConfig d;
  config->mode = static_cast<trlab_transducer>(d.mode);
  config->ctc_head = static_cast<trlab_ctc_head>(d.ctc_head);
  config->feat_dim = static_cast<uint32_t>(d.feat_dim);
  config->hidden_dim = static_cast<uint32_t>(d.hidden_dim);
  config->joint_dim = static_cast<uint32_t>(d.joint_dim);
  config->encoder_layers = static_cast<uint32_t>(d.encoder_layers);
  config->vocab_size = static_cast<uint32_t>(d.vocab_size);
  config->stride = static_cast<uint32_t>(d.stride);
  config->causal = d.causal ? 1 : 0;
}

trlab_status trlab_model_create(const trlab_model_config *config, uint64_t seed,
                                trlab_model **out) {
  return Guard([&] {
    Require(config != nullptr, "config");
    Require(out != nullptr, "out");
    auto *m = new trlab_model;
    try {
      m->model.emplace(ToModelConfig(*config), seed);
    } catch (...) {
      delete m;
      throw;
    }
    *out = m;
  });
}

trlab_status trlab_model_load(const char *path, trlab_model **out) {
  return Guard([&] {
    Require(path != nullptr, "path");
    Require(out != nullptr, "out");
    trlab::LoadedCheckpoint loaded = trlab::LoadCheckpoint(path);
    auto *m = new trlab_model;
    m->model.emplace(std::move(loaded.model));
    m->metadata = std::move(loaded.metadata);
    *out = m;
  });
}

trlab_status trlab_model_save(const trlab_model *model, const char *path) {
  return Guard([&] {
    Require(model != nullptr, "model");
    Require(path != nullptr, "path");
    trlab::SaveCheckpoint(*model->model, path, model->metadata);
  });
}

void trlab_model_free(trlab_model *model) { delete model; }

trlab_status trlab_model_set_metadata(trlab_model *model, const char *text) {
  return Guard([&] {
    Require(model != nullptr, "model");
    model->metadata = text == nullptr ? "" : text;
  });
}

const char *trlab_model_metadata(const trlab_model *model) {
  return model == nullptr ? "" : model->metadata.c_str();
}

trlab_status trlab_model_get_config(const trlab_model *model, trlab_model_config *out) {
  return Guard([&] {
    Require(model != nullptr, "model");
    Require(out != nullptr, "out");
    const trlab::ModelConfig &c = model->model->config();
    out->mode = static_cast<trlab_transducer>(c.mode);
    out->ctc_head = static_cast<trlab_ctc_head>(c.ctc_head);
    out->feat_dim = static_cast<uint32_t>(c.feat_dim);
    out->hidden_dim = static_cast<uint32_t>(c.hidden_dim);
    out->joint_dim = static_cast<uint32_t>(c.joint_dim);
    out->encoder_layers = static_cast<uint32_t>(c.encoder_layers);
    out->vocab_size = static_cast<uint32_t>(c.vocab_size);
    out->stride = static_cast<uint32_t>(c.stride);
    out->causal = c.causal ? 1 : 0;
  });
}

size_t trlab_model_parameter_count(const trlab_model *model) {
  return model == nullptr ? 0 : model->model->params().ScalarCount();
}

void trlab_train_config_default(trlab_train_config *config) {
  if (config == nullptr) return;
  const trlab::TrainConfig d;
  config->alpha = d.alpha;
  config->beta = d.beta;
  config->learning_rate = d.learning_rate;
  config->warmup_steps = static_cast<uint32_t>(d.warmup_steps);
  config->epochs = static_cast<uint32_t>(d.epochs);
  config->batch_size = static_cast<uint32_t>(d.batch_size);
  config->grad_clip = d.grad_clip;
  config->seed = d.seed;
  config->jobs = d.jobs;
}

trlab_status trlab_model_train(trlab_model *model, const trlab_dataset *dataset,
                               const trlab_train_config *config, trlab_epoch_callback callback,
                               void *user, trlab_train_summary *summary) {
  return Guard([&] {
    Require(model != nullptr, "model");
    Require(dataset != nullptr, "dataset");
    Require(config != nullptr, "config");
    trlab::TrainConfig c;
    c.alpha = config->alpha;
    c.beta = config->beta;
    c.learning_rate = config->learning_rate;
    c.warmup_steps = config->warmup_steps;
    c.epochs = config->epochs;
    c.batch_size = config->batch_size;
    c.grad_clip = config->grad_clip;
    c.seed = config->seed;
    c.jobs = config->jobs;
    trlab::EpochCallback on_epoch;
    if (callback != nullptr) {
      on_epoch = [&](const trlab::EpochRecord &r) {
        const trlab_epoch_record rec{static_cast<uint32_t>(r.epoch), r.split.c_str(), r.rnnt,
                                     r.ctc, r.ilm, r.joint};
        callback(&rec, user);
      };
    }
    trlab::TrainResult result =
        trlab::Train(&*model->model, dataset->data.train, dataset->data.dev, c, on_epoch);
    model->trace = std::move(result.trace);
    if (summary != nullptr) {
      summary->best_epoch = static_cast<uint32_t>(result.best_epoch);
      summary->best_dev_loss = result.best_dev_loss;
      summary->skipped_utterances = result.skipped_utterances;
    }
  });
}

trlab_status trlab_model_write_loss_trace(const trlab_model *model, const char *path,
                                          uint64_t config_hash) {
  return Guard([&] {
    Require(model != nullptr, "model");
    WriteText(path, trlab::LossTraceCsv(model->trace, config_hash));
  });
}

void trlab_decode_config_default(trlab_decode_config *config) {
  if (config == nullptr) return;
  const trlab::DecodeConfig d;
  const trlab::ThresholdConfig t;
  config->algorithm = static_cast<trlab_algorithm>(d.algorithm);
  config->beam = static_cast<uint32_t>(d.beam);
  config->alsd_max_symbols = d.alsd_max_symbols;
  config->tsd_max_expansions = static_cast<uint32_t>(d.tsd_max_expansions);
  config->max_output_tokens = static_cast<uint32_t>(d.max_output_tokens);
  config->threshold_mode = static_cast<trlab_threshold_mode>(t.mode);
  config->hat_lambda = t.hat_lambda;
  config->ctc_lambda = t.ctc_lambda;
  config->blank_source = static_cast<trlab_blank_source>(t.blank_source);
}

trlab_status trlab_decode(const trlab_model *model, const trlab_dataset *dataset,
                          trlab_split split, const trlab_decode_config *config, unsigned jobs,
                          trlab_decode_result **out) {
  return Guard([&] {
    Require(model != nullptr, "model");
    Require(dataset != nullptr, "dataset");
    Require(config != nullptr, "config");
    Require(out != nullptr, "out");
    auto result = std::make_unique<trlab_decode_result>();
    result->config.algorithm =
        CheckEnum<trlab::SearchAlgorithm>(config->algorithm, 2, "algorithm");
    result->config.beam = config->beam;
    result->config.alsd_max_symbols = config->alsd_max_symbols;
    result->config.tsd_max_expansions = config->tsd_max_expansions;
    result->config.max_output_tokens = config->max_output_tokens;
    result->threshold.mode =
        CheckEnum<trlab::ThresholdMode>(config->threshold_mode, 3, "threshold mode");
    result->threshold.hat_lambda = config->hat_lambda;
    result->threshold.ctc_lambda = config->ctc_lambda;
    result->threshold.blank_source =
        CheckEnum<trlab::BlankSource>(config->blank_source, 1, "blank source");
    const trlab::Model &m = *model->model;
    if (dataset->data.feat_dim != m.config().feat_dim)
      trlab::Fail(trlab::ErrorCode::kConfig, "dataset feature dimension does not match model");
    if (dataset->data.vocab_size != m.config().vocab_size)
      trlab::Fail(trlab::ErrorCode::kConfig, "dataset vocabulary does not match model");
    const auto &utts = dataset->data.split(ToSplit(split));
    result->corpus = trlab::DecodeCorpus(m, utts, result->config, result->threshold, jobs);
    result->vocab = trlab::Vocabulary::Synthetic(m.config().vocab_size);
    for (const trlab::Utterance &u : utts)
      result->utterances.push_back({u.id, trlab::Matrix(0, 0), u.reference});
    *out = result.release();
  });
}

void trlab_decode_result_free(trlab_decode_result *result) { delete result; }

size_t trlab_decode_result_size(const trlab_decode_result *result) {
  return result == nullptr ? 0 : result->corpus.utterances.size();
}

trlab_status trlab_decode_result_utterance(const trlab_decode_result *result, size_t index,
                                           trlab_utterance_result *out) {
  return Guard([&] {
    Require(result != nullptr, "result");
    Require(out != nullptr, "out");
    if (index >= result->corpus.utterances.size())
      trlab::Fail(trlab::ErrorCode::kInvalidArgument, "utterance index out of range");
    const trlab::UtteranceResult &r = result->corpus.utterances[index];
    out->id = result->utterances[index].id.c_str();
    out->tokens = r.transcript.data();
    out->token_count = r.transcript.size();
    out->log_score = r.nbest.empty() ? 0.0 : r.nbest.front().log_score;
    FillStats(r.stats, &out->encoder_frames, &out->kept_frames, &out->blank_head_calls,
              &out->label_head_calls, &out->decode_seconds, &out->audio_seconds);
  });
}

trlab_status trlab_decode_result_summary(const trlab_decode_result *result,
                                         trlab_summary *out) {
  return Guard([&] {
    Require(result != nullptr, "result");
    Require(out != nullptr, "out");
    const trlab::EvalSummary &s = result->corpus.summary;
    out->wer = s.wer;
    out->substitutions = s.substitutions;
    out->insertions = s.insertions;
    out->deletions = s.deletions;
    out->reference_tokens = s.reference_tokens;
    out->nbp = s.nbp;
    out->jcr = s.jcr;
    out->rtf = s.rtf;
    out->oracle_nbp = s.oracle_nbp;
    FillStats(s.totals, &out->encoder_frames, &out->kept_frames, &out->blank_head_calls,
              &out->label_head_calls, &out->decode_seconds, &out->audio_seconds);
  });
}

trlab_status trlab_decode_result_write_report(const trlab_decode_result *result,
                                              const char *path, uint64_t config_hash) {
  return Guard([&] {
    Require(result != nullptr, "result");
    WriteText(path, trlab::DecodeReportCsv(result->utterances, result->corpus.utterances,
                                           result->vocab, result->config, result->threshold,
                                           config_hash));
  });
}

trlab_status trlab_decode_result_write_summary(const trlab_decode_result *result,
                                               const char *path, uint64_t config_hash) {
  return Guard([&] {
    Require(result != nullptr, "result");
    WriteText(path, trlab::SummaryCsv(result->corpus.summary, result->config,
                                      result->threshold, config_hash));
  });
}

trlab_status trlab_write_sweep_curve(const trlab_decode_result *const *results, size_t count,
                                     const char *path, uint64_t config_hash) {
  return Guard([&] {
    Require(results != nullptr || count == 0, "results");
    std::vector<trlab::SweepPoint> points;
    for (size_t i = 0; i < count; ++i) {
      Require(results[i] != nullptr, "result");
      points.push_back({results[i]->threshold, results[i]->corpus.summary});
    }
    WriteText(path, trlab::SweepCurveCsv(points, config_hash));
  });
}

}  // extern "C"
