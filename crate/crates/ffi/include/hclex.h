#ifndef HCLEX_H
#define HCLEX_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum HclexStatus {
  HCLEX_STATUS_OK = 0,
  HCLEX_STATUS_NULL_POINTER = 1,
  HCLEX_STATUS_INVALID_UTF8 = 2,
  /**
   * A file could not be opened or read.
   */
  HCLEX_STATUS_IO = 3,
  /**
   * Input data was rejected, e.g. a malformed lexicon.
   */
  HCLEX_STATUS_INVALID_DATA = 4,
  /**
   * An index or length argument is out of range.
   */
  HCLEX_STATUS_OUT_OF_RANGE = 5,
  /**
   * The caller's buffer is too small; the required size was reported.
   */
  HCLEX_STATUS_BUFFER_TOO_SMALL = 6,
  /**
   * A token is not in the vocabulary.
   */
  HCLEX_STATUS_UNKNOWN_TOKEN = 7,
  HCLEX_STATUS_INTERNAL = 8,
} HclexStatus;

typedef struct HclexEmbeddings HclexEmbeddings;

typedef struct HclexLexicon HclexLexicon;

typedef struct HclexMatcher HclexMatcher;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *hclex_version(void);

/**
 * Copies the calling thread's last error message into `buf`.
 *
 * # Safety
 * `buf` must point to `buf_len` writable bytes or be null; `out_len` must
 * be null or writable.
 */
enum HclexStatus hclex_last_error_message(char *buf, size_t buf_len, size_t *out_len);

/**
 * Loads the lexicon bundled with the library.
 *
 * # Safety
 * `out` must be a valid pointer to a handle slot.
 */
enum HclexStatus hclex_lexicon_published(struct HclexLexicon **out);

/**
 * Loads a lexicon CSV (`term,category,subcategory,source,similarity`).
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` a valid handle slot.
 */
enum HclexStatus hclex_lexicon_load(const char *path, struct HclexLexicon **out);

/**
 * Number of terms in the lexicon; 0 for a null handle.
 *
 * # Safety
 * `lexicon` must be null or a live handle.
 */
size_t hclex_lexicon_len(const struct HclexLexicon *lexicon);

/**
 * # Safety
 * `lexicon` must be null or a handle not yet freed.
 */
void hclex_lexicon_free(struct HclexLexicon *lexicon);

/**
 * Compiles a lexicon into a matcher. `exclude` lists `n_exclude`
 * subcategory names whose columns are dropped, e.g. `"covid"`.
 *
 * # Safety
 * `lexicon` must be a live handle, `exclude` null or an array of
 * `n_exclude` NUL-terminated strings, `out` a valid handle slot.
 */
enum HclexStatus hclex_matcher_compile(const struct HclexLexicon *lexicon,
                                       const char *const *exclude,
                                       size_t n_exclude,
                                       struct HclexMatcher **out);

/**
 * Number of score columns; 0 for a null handle.
 *
 * # Safety
 * `matcher` must be null or a live handle.
 */
size_t hclex_matcher_columns(const struct HclexMatcher *matcher);

/**
 * Copies the label of column `index`, e.g. `"Health and Safety (covid)"`.
 *
 * # Safety
 * `matcher` must be a live handle; `buf`/`out_len` as for
 * [`hclex_last_error_message`].
 */
enum HclexStatus hclex_matcher_column_label(const struct HclexMatcher *matcher,
                                            size_t index,
                                            char *buf,
                                            size_t buf_len,
                                            size_t *out_len);

/**
 * Scores one text. `counts` receives `n_counts` hit counts, which must equal
 * the column count; `total_tokens` receives the token count.
 *
 * # Safety
 * `text` must be NUL-terminated, `counts` must point to `n_counts`
 * writable values and `total_tokens` must be writable or null.
 */
enum HclexStatus hclex_score_text(const struct HclexMatcher *matcher,
                                  const char *text,
                                  uint64_t *counts,
                                  size_t n_counts,
                                  uint64_t *total_tokens);

/**
 * # Safety
 * `matcher` must be null or a handle not yet freed.
 */
void hclex_matcher_free(struct HclexMatcher *matcher);

/**
 * Loads a binary embedding file written by `hclex train`.
 *
 * # Safety
 * `path` must be NUL-terminated; `out` a valid handle slot.
 */
enum HclexStatus hclex_embeddings_load(const char *path, struct HclexEmbeddings **out);

/**
 * Vocabulary size; 0 for a null handle.
 *
 * # Safety
 * `emb` must be null or a live handle.
 */
size_t hclex_embeddings_len(const struct HclexEmbeddings *emb);

/**
 * Vector dimension; 0 for a null handle.
 *
 * # Safety
 * `emb` must be null or a live handle.
 */
size_t hclex_embeddings_dim(const struct HclexEmbeddings *emb);

/**
 * Cosine similarity of two vocabulary tokens.
 *
 * # Safety
 * `emb` must be a live handle, `a` and `b` NUL-terminated, `out` writable.
 */
enum HclexStatus hclex_embeddings_cosine(const struct HclexEmbeddings *emb,
                                         const char *a,
                                         const char *b,
                                         double *out);

/**
 * # Safety
 * `emb` must be null or a handle not yet freed.
 */
void hclex_embeddings_free(struct HclexEmbeddings *emb);

/**
 * F1-maximizing threshold over `n` binary labels (0 or 1) and
 * probabilities. Ties go to the higher threshold.
 *
 * # Safety
 * `labels` and `probs` must point to `n` values; `threshold` and `f1`
 * must be writable.
 */
enum HclexStatus hclex_select_threshold(const uint8_t *labels,
                                        const double *probs,
                                        size_t n,
                                        double *threshold,
                                        double *f1);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HCLEX_H */
