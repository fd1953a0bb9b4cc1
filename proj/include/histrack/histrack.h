/* Copyright 2026 The histrack Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#ifndef HISTRACK_HISTRACK_H_
#define HISTRACK_HISTRACK_H_

/* C interface of the histrack library.
 *
 * Objects are opaque handles released with the matching *_free function.
 * Every call that can fail returns an ht_status; on failure the message of
 * the calling thread is available from ht_last_error() until its next call.
 * String outputs use caller buffers: `needed` receives the length including
 * the terminating NUL, and HT_ERR_BUFFER is returned when `cap` is too small.
 */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define HT_API __declspec(dllexport)
#else
#define HT_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ht_status {
  HT_OK = 0,
  HT_ERR_ARGUMENT = 1,   /* null handle, index out of range, bad enum */
  HT_ERR_VALIDATION = 2, /* configuration or input failed validation */
  HT_ERR_IO = 3,         /* file missing, unreadable or unwritable */
  HT_ERR_FORMAT = 4,     /* malformed archive or text file */
  HT_ERR_BUFFER = 5,     /* output buffer too small */
  HT_ERR_INTERNAL = 6
} ht_status;

typedef struct ht_settings ht_settings;
typedef struct ht_dataset ht_dataset;
typedef struct ht_model ht_model;
typedef struct ht_trackfile ht_trackfile;
typedef struct ht_report ht_report;

HT_API const char* ht_last_error(void);
HT_API const char* ht_version(void);

/* Settings: model, tracking, loss, train, scene and data keys as
 * "section.name". */
HT_API ht_status ht_settings_default(ht_settings** out);
HT_API ht_status ht_settings_load(const char* path, ht_settings** out);
HT_API ht_status ht_settings_parse(const char* text, ht_settings** out);
HT_API ht_status ht_settings_set(ht_settings* s, const char* key, const char* value);
HT_API ht_status ht_settings_get(const ht_settings* s, const char* key, char* buf, size_t cap, size_t* needed);
HT_API ht_status ht_settings_text(const ht_settings* s, char* buf, size_t cap, size_t* needed);
HT_API void ht_settings_free(ht_settings* s);

/* Datasets. */
HT_API ht_status ht_dataset_generate(const ht_settings* s, const char* split, int count, uint64_t seed,
                                     ht_dataset** out);
HT_API ht_status ht_dataset_load(const char* path, ht_dataset** out);
/* One MOTChallenge sequence directory (img1/, gt/gt.txt) resized to the
 * model image size of `s`. */
HT_API ht_status ht_dataset_load_mot(const char* dir, const ht_settings* s, ht_dataset** out);
HT_API ht_status ht_dataset_save(const ht_dataset* d, const char* path);
HT_API ht_status ht_dataset_downsample(const ht_dataset* d, int n, ht_dataset** out);
HT_API ht_status ht_dataset_size(const ht_dataset* d, int* count);
HT_API ht_status ht_dataset_video_name(const ht_dataset* d, int index, char* buf, size_t cap, size_t* needed);
HT_API ht_status ht_dataset_video_length(const ht_dataset* d, int index, int* frames);
HT_API ht_status ht_dataset_fingerprint(const ht_dataset* d, uint64_t* out);
HT_API void ht_dataset_free(ht_dataset* d);

/* Models. */
typedef void (*ht_progress_fn)(void* user, int step, int total_steps, double loss, double toc_loss,
                               double learning_rate);
HT_API ht_status ht_model_train(const ht_settings* s, const ht_dataset* train, ht_progress_fn progress, void* user,
                                ht_model** out);
HT_API ht_status ht_model_init(const ht_settings* s, uint64_t seed, ht_model** out);
HT_API ht_status ht_model_load(const char* path, ht_model** out);
HT_API ht_status ht_model_save(const ht_model* m, const char* path);
/* Overrides an inference-time setting ("tracking.*" keys only). */
HT_API ht_status ht_model_set(ht_model* m, const char* key, const char* value);
HT_API ht_status ht_model_get(const ht_model* m, const char* key, char* buf, size_t cap, size_t* needed);
/* Fails with HT_ERR_VALIDATION when the model does not fit `s`. */
HT_API ht_status ht_model_check(const ht_model* m, const ht_settings* s);
HT_API ht_status ht_model_fingerprint(const ht_model* m, uint64_t* out);
HT_API ht_status ht_model_loss_curve(const ht_model* m, char* buf, size_t cap, size_t* needed);
HT_API void ht_model_free(ht_model* m);

/* Tracking and track files. */
HT_API ht_status ht_track(const ht_model* m, const ht_dataset* d, int video, ht_trackfile** out);
HT_API ht_status ht_trackfile_load(const char* path, ht_trackfile** out);
HT_API ht_status ht_trackfile_save(const ht_trackfile* t, const char* path);
HT_API ht_status ht_trackfile_text(const ht_trackfile* t, char* buf, size_t cap, size_t* needed);
HT_API ht_status ht_trackfile_rows(const ht_trackfile* t, int* rows);
HT_API ht_status ht_trackfile_has_duplicates(const ht_trackfile* t, int* duplicates);
HT_API void ht_trackfile_free(ht_trackfile* t);

/* Evaluation: preds[i] holds the tracks of video i of `gt`. */
HT_API ht_status ht_evaluate(const ht_trackfile* const* preds, int count, const ht_dataset* gt, ht_report** out);
/* Metric names: hota, det_a, ass_a, idf1, mota, fp, fn, idsw, gt_count,
 * pred_count. */
HT_API ht_status ht_report_get(const ht_report* r, const char* metric, double* value);
HT_API ht_status ht_report_json(const ht_report* r, char* buf, size_t cap, size_t* needed);
HT_API void ht_report_free(ht_report* r);

HT_API ht_status ht_equivalent_fps(double fps, int n, double* out);

#ifdef __cplusplus
}
#endif

#endif /* HISTRACK_HISTRACK_H_ */
