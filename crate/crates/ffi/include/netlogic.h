#ifndef NETLOGIC_H
#define NETLOGIC_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum NlGender {
  NL_GENDER_UNKNOWN = 0,
  NL_GENDER_MALE = 1,
  NL_GENDER_FEMALE = 2,
} NlGender;

typedef enum NlMode {
  NL_MODE_AUTO = 0,
  NL_MODE_EXACT = 1,
  NL_MODE_GIBBS = 2,
} NlMode;

typedef enum NlStatus {
  NL_STATUS_OK = 0,
  NL_STATUS_NULL_POINTER = 1,
  NL_STATUS_INVALID_UTF8 = 2,
  NL_STATUS_PARSE = 3,
  NL_STATUS_DATA = 4,
  NL_STATUS_OUT_OF_RANGE = 5,
  NL_STATUS_CONFIG = 6,
  NL_STATUS_SOLVER = 7,
  NL_STATUS_NOT_FOUND = 8,
  NL_STATUS_PANIC = 9,
} NlStatus;

// A knowledge base grounded against its evidence.
typedef struct NlModel NlModel;

// Scores for the open atoms of a model, sorted by atom text.
typedef struct NlResult NlResult;

// MLN inference settings; start from [`nl_mln_options_default`].
typedef struct NlMlnOptions {
  enum NlMode mode;
  size_t samples;
  size_t burn_in;
  size_t chains;
  uint64_t seed;
} NlMlnOptions;

// PSL inference settings; start from [`nl_psl_options_default`].
typedef struct NlPslOptions {
  double tolerance;
  size_t max_iters;
  uint64_t seed;
} NlPslOptions;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread, or null. Valid until
// the next call into this library on the same thread.
const char *nl_last_error(void);

// Library version as a static string.
const char *nl_version(void);

struct NlMlnOptions nl_mln_options_default(void);

struct NlPslOptions nl_psl_options_default(void);

// Parses and grounds a model. `schema` null selects the built-in social
// schema, whose categories come from `category_set` (one label per line)
// or the defaults. `evidence` and `categories` may be null.
//
// # Safety
// String arguments are null or valid NUL-terminated strings; `out` is
// valid for writes.
enum NlStatus nl_model_new(const char *schema,
                           const char *rules,
                           const char *evidence,
                           const char *categories,
                           const char *category_set,
                           struct NlModel **out);

// # Safety
// `model` is null or came from [`nl_model_new`] and was not freed.
void nl_model_free(struct NlModel *model);

// Ground atoms in the model, evidence included; 0 for null.
//
// # Safety
// `model` is null or a live handle.
size_t nl_model_num_atoms(const struct NlModel *model);

// Ground rules after pruning; 0 for null.
//
// # Safety
// `model` is null or a live handle.
size_t nl_model_num_ground_rules(const struct NlModel *model);

// MLN marginals for every open atom. `options` null means defaults.
//
// # Safety
// `model` is a live handle, `options` null or valid, `out` valid for
// writes.
enum NlStatus nl_infer_mln(const struct NlModel *model,
                           const struct NlMlnOptions *options,
                           struct NlResult **out);

// PSL MPE values for every open atom. `options` null means defaults.
//
// # Safety
// As [`nl_infer_mln`].
enum NlStatus nl_infer_psl(const struct NlModel *model,
                           const struct NlPslOptions *options,
                           struct NlResult **out);

// # Safety
// `result` is null or came from an inference call and was not freed.
void nl_result_free(struct NlResult *result);

// Number of rows; 0 for null.
//
// # Safety
// `result` is null or a live handle.
size_t nl_result_len(const struct NlResult *result);

// Atom text of row `i`, owned by the result; null when out of range.
//
// # Safety
// `result` is null or a live handle.
const char *nl_result_atom(const struct NlResult *result, size_t i);

// Score of row `i`.
//
// # Safety
// `result` is null or a live handle; `out` valid for writes.
enum NlStatus nl_result_value(const struct NlResult *result, size_t i, double *out);

// Score of the atom with text `atom`, e.g. `LikeCat_food(u1)`.
//
// # Safety
// `result` is a live handle, `atom` a valid string, `out` valid for
// writes.
enum NlStatus nl_result_lookup(const struct NlResult *result, const char *atom, double *out);

// Lukasiewicz conjunction of two truth values in [0, 1].
//
// # Safety
// `out` is valid for writes.
enum NlStatus nl_soft_and(double a, double b, double *out);

// Lukasiewicz disjunction of two truth values in [0, 1].
//
// # Safety
// `out` is valid for writes.
enum NlStatus nl_soft_or(double a, double b, double *out);

// Spouse confidence for a classifier score; `*present` is false when the
// score does not indicate a spouse, and `*out` is then left untouched.
//
// # Safety
// `out` and `present` are valid for writes.
enum NlStatus nl_spouse_confidence(double score, double *out, bool *present);

// Gender implied by male and female birth counts for a name.
enum NlGender nl_infer_gender(uint64_t male_count, uint64_t female_count);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* NETLOGIC_H */
