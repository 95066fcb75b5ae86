// include/trlab/trlab.h

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

#ifndef TRLAB_TRLAB_H_
#define TRLAB_TRLAB_H_

#include <stddef.h>
#include <stdint.h>

#if defined(TRLAB_BUILDING_LIBRARY)
#define TRLAB_API __attribute__((visibility("default")))
#else
#define TRLAB_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum trlab_status {
  TRLAB_OK = 0,
  TRLAB_ERR_INVALID_ARGUMENT = 1,
  TRLAB_ERR_UNSUPPORTED = 2,
  TRLAB_ERR_PRECONDITION = 3,
  TRLAB_ERR_CONFIG = 4,
  TRLAB_ERR_FORMAT = 5,
  TRLAB_ERR_IO = 6,
  TRLAB_ERR_NUMERIC = 7,
  TRLAB_ERR_INTERNAL = 8
} trlab_status;

/* Message of the last failed call on this thread; empty after success. */
TRLAB_API const char *trlab_last_error(void);
TRLAB_API const char *trlab_status_name(trlab_status status);
TRLAB_API const char *trlab_version(void);
/* 64-bit FNV-1a, the hash embedded in every artifact. */
TRLAB_API uint64_t trlab_hash(const void *data, size_t size);

typedef struct trlab_dataset trlab_dataset;
typedef struct trlab_model trlab_model;
typedef struct trlab_decode_result trlab_decode_result;

typedef enum trlab_split { TRLAB_SPLIT_TRAIN = 0, TRLAB_SPLIT_DEV = 1, TRLAB_SPLIT_TEST = 2 } trlab_split;

/* ---- data ---- */

typedef struct trlab_data_config {
  uint32_t vocab_size; /* including blank */
  uint32_t feat_dim;
  uint32_t min_duration, max_duration;
  double noise;
  uint32_t min_tokens, max_tokens;
  double silence_prob;
  uint32_t min_silence, max_silence;
  uint32_t train_count, dev_count, test_count;
  uint32_t stride;
  uint64_t seed;
} trlab_data_config;

TRLAB_API void trlab_data_config_default(trlab_data_config *config);
TRLAB_API trlab_status trlab_dataset_generate(const trlab_data_config *config, unsigned jobs,
                                              trlab_dataset **out);
TRLAB_API trlab_status trlab_dataset_load(const char *path, trlab_dataset **out);
TRLAB_API trlab_status trlab_dataset_save(const trlab_dataset *dataset, const char *path);
TRLAB_API void trlab_dataset_free(trlab_dataset *dataset);
TRLAB_API trlab_status trlab_dataset_set_metadata(trlab_dataset *dataset, const char *text);
TRLAB_API const char *trlab_dataset_metadata(const trlab_dataset *dataset);
TRLAB_API size_t trlab_dataset_size(const trlab_dataset *dataset, trlab_split split);
TRLAB_API uint32_t trlab_dataset_feat_dim(const trlab_dataset *dataset);
TRLAB_API uint32_t trlab_dataset_vocab_size(const trlab_dataset *dataset);
/* Reference tokens of one utterance; the pointer lives as long as the dataset. */
TRLAB_API trlab_status trlab_dataset_reference(const trlab_dataset *dataset, trlab_split split,
                                               size_t index, const uint32_t **tokens,
                                               size_t *count);
TRLAB_API trlab_status trlab_dataset_oracle_nbp(const trlab_dataset *dataset, trlab_split split,
                                                uint32_t stride, double *percent);

/* ---- model ---- */

typedef enum trlab_transducer { TRLAB_RNNT = 0, TRLAB_HAT = 1 } trlab_transducer;
typedef enum trlab_ctc_head {
  TRLAB_HEAD_NONE = 0,
  TRLAB_HEAD_CTC = 1,
  TRLAB_HEAD_FCTC = 2,
  TRLAB_HEAD_IAM = 3
} trlab_ctc_head;

typedef struct trlab_model_config {
  trlab_transducer mode;
  trlab_ctc_head ctc_head;
  uint32_t feat_dim;
  uint32_t hidden_dim;
  uint32_t joint_dim;
  uint32_t encoder_layers;
  uint32_t vocab_size;
  uint32_t stride;
  int causal;
} trlab_model_config;

TRLAB_API void trlab_model_config_default(trlab_model_config *config);
TRLAB_API trlab_status trlab_model_create(const trlab_model_config *config, uint64_t seed,
                                          trlab_model **out);
TRLAB_API trlab_status trlab_model_load(const char *path, trlab_model **out);
TRLAB_API trlab_status trlab_model_save(const trlab_model *model, const char *path);
TRLAB_API void trlab_model_free(trlab_model *model);
TRLAB_API trlab_status trlab_model_set_metadata(trlab_model *model, const char *text);
TRLAB_API const char *trlab_model_metadata(const trlab_model *model);
TRLAB_API trlab_status trlab_model_get_config(const trlab_model *model, trlab_model_config *out);
TRLAB_API size_t trlab_model_parameter_count(const trlab_model *model);

typedef struct trlab_train_config {
  double alpha; /* CTC-head weight */
  double beta;  /* ILM weight */
  double learning_rate;
  uint32_t warmup_steps;
  uint32_t epochs;
  uint32_t batch_size;
  double grad_clip;
  uint64_t seed;
  uint32_t jobs;
} trlab_train_config;

typedef struct trlab_epoch_record {
  uint32_t epoch;
  const char *split;
  double rnnt, ctc, ilm, joint;
} trlab_epoch_record;

typedef void (*trlab_epoch_callback)(const trlab_epoch_record *record, void *user);

typedef struct trlab_train_summary {
  uint32_t best_epoch;
  double best_dev_loss;
  uint64_t skipped_utterances;
} trlab_train_summary;

TRLAB_API void trlab_train_config_default(trlab_train_config *config);
/* Trains on the train split, selecting parameters by dev joint loss. The
   loss trace is kept on the model handle until the next call. */
TRLAB_API trlab_status trlab_model_train(trlab_model *model, const trlab_dataset *dataset,
                                         const trlab_train_config *config,
                                         trlab_epoch_callback callback, void *user,
                                         trlab_train_summary *summary);
TRLAB_API trlab_status trlab_model_write_loss_trace(const trlab_model *model, const char *path,
                                                    uint64_t config_hash);

/* ---- decode ---- */

typedef enum trlab_algorithm {
  TRLAB_GREEDY_CTC = 0,
  TRLAB_ALSD = 1,
  TRLAB_TSD = 2
} trlab_algorithm;

typedef enum trlab_threshold_mode {
  TRLAB_THRESHOLD_NONE = 0,
  TRLAB_THRESHOLD_HAT = 1,
  TRLAB_THRESHOLD_CTC = 2,
  TRLAB_THRESHOLD_DUAL = 3
} trlab_threshold_mode;

typedef enum trlab_blank_source { TRLAB_BLANK_IAM = 0, TRLAB_BLANK_FCTC = 1 } trlab_blank_source;

typedef struct trlab_decode_config {
  trlab_algorithm algorithm;
  uint32_t beam;
  double alsd_max_symbols;
  uint32_t tsd_max_expansions;
  uint32_t max_output_tokens; /* 0 = unlimited */
  trlab_threshold_mode threshold_mode;
  double hat_lambda;
  double ctc_lambda;
  trlab_blank_source blank_source;
} trlab_decode_config;

typedef struct trlab_summary {
  double wer; /* percent */
  uint64_t substitutions, insertions, deletions, reference_tokens;
  double nbp, jcr, rtf, oracle_nbp; /* nbp/jcr/oracle_nbp in percent */
  uint64_t encoder_frames, kept_frames, blank_head_calls, label_head_calls;
  double decode_seconds, audio_seconds;
} trlab_summary;

typedef struct trlab_utterance_result {
  const char *id;
  const uint32_t *tokens;
  size_t token_count;
  double log_score;
  uint64_t encoder_frames, kept_frames, blank_head_calls, label_head_calls;
  double decode_seconds, audio_seconds;
} trlab_utterance_result;

TRLAB_API void trlab_decode_config_default(trlab_decode_config *config);
TRLAB_API trlab_status trlab_decode(const trlab_model *model, const trlab_dataset *dataset,
                                    trlab_split split, const trlab_decode_config *config,
                                    unsigned jobs, trlab_decode_result **out);
TRLAB_API void trlab_decode_result_free(trlab_decode_result *result);
TRLAB_API size_t trlab_decode_result_size(const trlab_decode_result *result);
/* Pointers in *out live as long as the result. */
TRLAB_API trlab_status trlab_decode_result_utterance(const trlab_decode_result *result,
                                                     size_t index, trlab_utterance_result *out);
TRLAB_API trlab_status trlab_decode_result_summary(const trlab_decode_result *result,
                                                   trlab_summary *out);
TRLAB_API trlab_status trlab_decode_result_write_report(const trlab_decode_result *result,
                                                        const char *path, uint64_t config_hash);
TRLAB_API trlab_status trlab_decode_result_write_summary(const trlab_decode_result *result,
                                                         const char *path, uint64_t config_hash);
/* One curve row per result, in the given order. */
TRLAB_API trlab_status trlab_write_sweep_curve(const trlab_decode_result *const *results,
                                               size_t count, const char *path,
                                               uint64_t config_hash);

#ifdef __cplusplus
}
#endif

#endif  // TRLAB_TRLAB_H_
