#ifndef NUMINA_H
#define NUMINA_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum NuminaStatus {
  NUMINA_STATUS_OK = 0,
  NUMINA_STATUS_NULL_POINTER = 1,
  NUMINA_STATUS_INVALID_ARGUMENT = 2,
  NUMINA_STATUS_IO = 3,
  NUMINA_STATUS_PARSE = 4,
  NUMINA_STATUS_NOT_CONVERGED = 5,
  NUMINA_STATUS_SHORTFALL = 6,
  NUMINA_STATUS_PANIC = 7,
} NuminaStatus;

typedef struct NuminaDataset NuminaDataset;

typedef struct NuminaNgt NuminaNgt;

typedef struct NuminaReport NuminaReport;

typedef struct NuminaScene NuminaScene;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message of the last failure on this thread, or null. The pointer stays
 valid until the next failing call on the same thread.
 */
const char *numina_last_error(void);

/*
 Library version as a static NUL-terminated string.
 */
const char *numina_version(void);

/*
 Releases a string returned by this library. Null is ignored.

 # Safety
 `s` must come from this library and not be freed twice.
 */
void numina_string_free(char *s);

/*
 Convex-hull distance between two point sets given as packed `x y z`
 triples (`n_a` and `n_b` points).

 # Safety
 `a` and `b` must point to `3 * n_a` and `3 * n_b` doubles.
 */
enum NuminaStatus numina_hull_distance(const double *a,
                                       size_t n_a,
                                       const double *b,
                                       size_t n_b,
                                       double tolerance,
                                       double *out_distance);

/*
 True when `pred` lies strictly within `threshold * |gt|` of `gt`; a zero
 ground truth requires an exact zero.
 */
bool numina_within_threshold(double pred, double gt, double threshold);

/*
 Fraction of the `n` predictions within `threshold` of their truths.

 # Safety
 `preds` and `truths` must point to `n` doubles each.
 */
enum NuminaStatus numina_threshold_accuracy(const double *preds,
                                            const double *truths,
                                            size_t n,
                                            double threshold,
                                            double *out_accuracy);

/*
 Loads a neutral scene JSON file.

 # Safety
 `path` must be a NUL-terminated string; `out` a writable handle slot.
 */
enum NuminaStatus numina_scene_load(const char *path, struct NuminaScene **out);

/*
 # Safety
 `scene` must be a live handle or null.
 */
size_t numina_scene_instance_count(const struct NuminaScene *scene);

/*
 # Safety
 `scene` must come from `numina_scene_load` and not be freed twice.
 */
void numina_scene_free(struct NuminaScene *scene);

/*
 Extracts the NGT table of a scene. `excluded_labels` is a comma-separated
 list; null selects the default filter (`item`, `object`).

 # Safety
 `scene` must be a live handle; `excluded_labels` null or NUL-terminated.
 */
enum NuminaStatus numina_ngt_extract(const struct NuminaScene *scene,
                                     const char *excluded_labels,
                                     double tolerance,
                                     struct NuminaNgt **out);

/*
 Reads an NGT JSON file.

 # Safety
 `path` must be NUL-terminated; `out` a writable handle slot.
 */
enum NuminaStatus numina_ngt_read(const char *path, struct NuminaNgt **out);

/*
 Hull distance between two instances of the table.

 # Safety
 `ngt` must be a live handle; ids NUL-terminated.
 */
enum NuminaStatus numina_ngt_distance(const struct NuminaNgt *ngt,
                                      const char *a,
                                      const char *b,
                                      double *out_distance);

/*
 The table serialized as NGT JSON; null on failure.

 # Safety
 `ngt` must be a live handle.
 */
char *numina_ngt_to_json(const struct NuminaNgt *ngt);

/*
 # Safety
 `ngt` must come from this library and not be freed twice.
 */
void numina_ngt_free(struct NuminaNgt *ngt);

/*
 Generates the rule-based dataset over `n_tables` NGT tables. `config_toml`
 uses the pipeline config keys (targets, margins, seed); null means
 defaults. The built-in template bank is used.

 # Safety
 `tables` must point to `n_tables` live handles.
 */
enum NuminaStatus numina_dataset_generate(const struct NuminaNgt *const *tables,
                                          size_t n_tables,
                                          const char *config_toml,
                                          struct NuminaDataset **out);

/*
 Reads a dataset JSONL file.

 # Safety
 `path` must be NUL-terminated; `out` a writable handle slot.
 */
enum NuminaStatus numina_dataset_read(const char *path, struct NuminaDataset **out);

/*
 # Safety
 `ds` must be a live handle or null.
 */
size_t numina_dataset_len(const struct NuminaDataset *ds);

/*
 The dataset as JSON Lines; null on failure.

 # Safety
 `ds` must be a live handle.
 */
char *numina_dataset_to_jsonl(const struct NuminaDataset *ds);

/*
 Runs the dataset self-check with the built-in template bank.

 # Safety
 `ds` must be a live handle; `out_passed` writable.
 */
enum NuminaStatus numina_dataset_selfcheck(const struct NuminaDataset *ds, bool *out_passed);

/*
 # Safety
 `ds` must come from this library and not be freed twice.
 */
void numina_dataset_free(struct NuminaDataset *ds);

/*
 Scores predictions (JSON Lines of `{"qa_id", "output"}`) against a dataset.

 # Safety
 `ds` must be a live handle; `predictions_jsonl` NUL-terminated.
 */
enum NuminaStatus numina_score(const struct NuminaDataset *ds,
                               const char *predictions_jsonl,
                               struct NuminaReport **out);

/*
 The score report as JSON; null on failure.

 # Safety
 `report` must be a live handle.
 */
char *numina_report_to_json(const struct NuminaReport *report);

/*
 # Safety
 `report` must come from this library and not be freed twice.
 */
void numina_report_free(struct NuminaReport *report);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NUMINA_H */
