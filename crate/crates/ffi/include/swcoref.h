#ifndef SWCOREF_H
#define SWCOREF_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum SwcStatus {
  SwcStatus_Ok = 0,
  SwcStatus_NullPointer = 1,
  SwcStatus_InvalidUtf8 = 2,
  SwcStatus_InvalidArgument = 3,
  SwcStatus_Io = 4,
  SwcStatus_Parse = 5,
  SwcStatus_InvalidCorpus = 6,
  SwcStatus_MissingGold = 7,
  SwcStatus_MentionMismatch = 8,
  SwcStatus_Internal = 99,
} SwcStatus;

/**
 * Opaque corpus handle.
 */
typedef struct SwcCorpus SwcCorpus;

/**
 * Opaque partition handle.
 */
typedef struct SwcPartition SwcPartition;

typedef struct SwcPrf {
  double precision;
  double recall;
  double f1;
} SwcPrf;

typedef struct SwcScoreReport {
  struct SwcPrf muc;
  struct SwcPrf b3;
  struct SwcPrf ceafe;
  double conll_f1;
} SwcScoreReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. The pointer stays
 * valid until the next call on the same thread; do not free it.
 */
const char *swc_last_error_message(void);

/**
 * Free a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not have been freed.
 */
void swc_string_free(char *s);

/**
 * Parse and validate a JSONL corpus held in memory.
 *
 * # Safety
 * `jsonl` must be a NUL-terminated string; `out` must be writable.
 */
enum SwcStatus swc_corpus_from_jsonl(const char *jsonl, struct SwcCorpus **out);

/**
 * Read and validate a JSONL corpus file.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
enum SwcStatus swc_corpus_from_path(const char *path, struct SwcCorpus **out);

/**
 * # Safety
 * `corpus` must come from this library and not have been freed. Null is ignored.
 */
void swc_corpus_free(struct SwcCorpus *corpus);

/**
 * Number of mentions, or 0 for null.
 *
 * # Safety
 * `corpus` must be null or a live handle.
 */
uintptr_t swc_corpus_mention_count(const struct SwcCorpus *corpus);

/**
 * Fuzzy-match clustering at threshold `theta` in [0, 1].
 *
 * # Safety
 * `corpus` must be a live handle; `out` must be writable.
 */
enum SwcStatus swc_resolve_fuzzy(const struct SwcCorpus *corpus,
                                 double theta,
                                 struct SwcPartition **out);

/**
 * Context-aware clustering over trigram-hash embeddings of dimension `dim`
 * (at least 8).
 *
 * # Safety
 * `corpus` must be a live handle; `out` must be writable.
 */
enum SwcStatus swc_resolve_car_hashed(const struct SwcCorpus *corpus,
                                      double alpha,
                                      double delta,
                                      uintptr_t max_context,
                                      uintptr_t dim,
                                      struct SwcPartition **out);

/**
 * Gold clustering of a fully labeled corpus.
 *
 * # Safety
 * `corpus` must be a live handle; `out` must be writable.
 */
enum SwcStatus swc_gold_partition(const struct SwcCorpus *corpus, struct SwcPartition **out);

/**
 * # Safety
 * `partition` must come from this library and not have been freed. Null is ignored.
 */
void swc_partition_free(struct SwcPartition *partition);

/**
 * Number of clustered mentions, or 0 for null.
 *
 * # Safety
 * `partition` must be null or a live handle.
 */
uintptr_t swc_partition_len(const struct SwcPartition *partition);

/**
 * Serialize to the partition JSON format. Free the result with
 * [`swc_string_free`].
 *
 * # Safety
 * `partition` must be a live handle; `out` must be writable.
 */
enum SwcStatus swc_partition_to_json(const struct SwcPartition *partition, char **out);

/**
 * Parse the partition JSON format.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum SwcStatus swc_partition_from_json(const char *json, struct SwcPartition **out);

/**
 * MUC, B-cubed, CEAF-e and their mean F1.
 *
 * # Safety
 * `key` and `response` must be live handles; `out` must be writable.
 */
enum SwcStatus swc_score(const struct SwcPartition *key,
                         const struct SwcPartition *response,
                         struct SwcScoreReport *out);

/**
 * Ratcliff/Obershelp similarity of two strings, written to `out`.
 *
 * # Safety
 * `a` and `b` must be NUL-terminated strings; `out` must be writable.
 */
enum SwcStatus swc_ro_similarity(const char *a, const char *b, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SWCOREF_H */
