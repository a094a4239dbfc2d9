/*
 * Copyright (c) 2026, The f2ind Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
/*
 * C interface to the f2ind neuro-fuzzy multimodal classifier.
 *
 * Every fallible call returns an f2ind_status. On failure the message is
 * available from f2ind_last_error() until the next call on the same thread.
 * Strings returned through char** out-parameters are heap-allocated by the
 * library and must be released with f2ind_string_free().
 */
#ifndef F2IND_F2IND_H_
#define F2IND_F2IND_H_

#include <stddef.h>
#include <stdint.h>

#if defined(F2IND_BUILDING_LIBRARY)
#define F2IND_API __attribute__((visibility("default")))
#else
#define F2IND_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum f2ind_status {
  F2IND_OK = 0,
  F2IND_ERR_CONFIG = 1,
  F2IND_ERR_IO = 2,
  F2IND_ERR_FORMAT = 3,
  F2IND_ERR_TRUNCATED = 4,
  F2IND_ERR_CORRUPT = 5,
  F2IND_ERR_SHAPE = 6,
  F2IND_ERR_NUMERIC = 7,
  F2IND_ERR_CACHE = 8,
  F2IND_ERR_INDEX = 9,
  F2IND_ERR_SCHEDULE = 10,
  F2IND_ERR_EMPTY = 11,
  F2IND_ERR_UNDEFINED_METRIC = 12,
  F2IND_ERR_INVALID_ARGUMENT = 13,
  F2IND_ERR_INTERNAL = 14
} f2ind_status;

typedef struct f2ind_dataset f2ind_dataset;
typedef struct f2ind_model f2ind_model;

typedef struct f2ind_dataset_info {
  size_t n_samples;
  size_t n_fake;
  size_t n_true;
  size_t n_missing_image;
  uint32_t text_dim;
  uint32_t image_dim;
} f2ind_dataset_info;

typedef struct f2ind_prediction {
  uint64_t sample_id;
  uint8_t label;
  double prob;        /* probability of fake news */
  double attn_image;  /* modality attention, sums to 1 with attn_text */
  double attn_text;
} f2ind_prediction;

F2IND_API const char* f2ind_version(void);
F2IND_API const char* f2ind_last_error(void);
F2IND_API const char* f2ind_status_name(int status);
F2IND_API void f2ind_string_free(char* s);

/* Datasets (F2EMB1 embedding files). */
F2IND_API int f2ind_dataset_read(const char* path, f2ind_dataset** out);
F2IND_API int f2ind_dataset_write(const f2ind_dataset* ds, const char* path);
/* config_json: {"n","fake_fraction","missing_image_fraction","separation",
 * "seed","text_dim","image_dim"}, all optional; NULL means defaults. */
F2IND_API int f2ind_dataset_synth(const char* config_json, f2ind_dataset** out);
F2IND_API int f2ind_dataset_info_get(const f2ind_dataset* ds, f2ind_dataset_info* out);
/* Rebuilds the stratified split a training run with `config_json` used and
 * returns the validation (validation != 0) or training rows of `fold`. */
F2IND_API int f2ind_dataset_fold(const f2ind_dataset* ds, const char* config_json, int fold,
                                 int validation, f2ind_dataset** out);
F2IND_API void f2ind_dataset_free(f2ind_dataset* ds);

/* Training. config_json overlays the defaults (NULL = defaults); unknown keys
 * are rejected. When out_dir is non-NULL the report (JSON and text table) and
 * one checkpoint per fold are written there. */
F2IND_API int f2ind_default_config(char** config_json);
F2IND_API int f2ind_train(const f2ind_dataset* ds, const char* config_json,
                          const char* out_dir, char** report_json);
/* Paired runs with and without the ANFIS head. */
F2IND_API int f2ind_ablate(const f2ind_dataset* ds, const char* config_json,
                           const char* out_dir, char** report_json);

/* Models (F2CKP1 checkpoints). */
F2IND_API int f2ind_model_load(const char* path, f2ind_model** out);
F2IND_API int f2ind_model_meta(const f2ind_model* model, char** meta_json);
F2IND_API void f2ind_model_free(f2ind_model* model);

/* threshold < 0 uses the threshold stored in the checkpoint. */
F2IND_API int f2ind_evaluate(const f2ind_model* model, const f2ind_dataset* ds,
                             double threshold, char** report_json);
/* Writes min(capacity, n_samples) rows; *written receives n_samples. */
F2IND_API int f2ind_predict(const f2ind_model* model, const f2ind_dataset* ds,
                            f2ind_prediction* out, size_t capacity, size_t* written);
/* Tab-separated rule table: rule_index, assignment, mean_norm_firing,
 * mean_contribution. Fails with F2IND_ERR_CONFIG for ablation checkpoints. */
F2IND_API int f2ind_inspect(const f2ind_model* model, const f2ind_dataset* ds,
                            char** rule_tsv);

/* Finite-difference check of the full model gradient. fault_block may name
 * a parameter block (e.g. "anfis.b") whose gradient is deliberately
 * corrupted; NULL for none. *passed is 1 or 0. */
F2IND_API int f2ind_gradcheck(const char* config_json, uint32_t text_dim, uint32_t image_dim,
                              uint64_t seed, const char* fault_block, int* passed,
                              char** report_json);

#ifdef __cplusplus
}
#endif

#endif /* F2IND_F2IND_H_ */
