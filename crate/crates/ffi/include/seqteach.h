#ifndef SEQTEACH_H
#define SEQTEACH_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result code of every fallible call.
typedef enum SeqteachStatus {
  SEQTEACH_STATUS_OK = 0,
  SEQTEACH_STATUS_NULL_POINTER = 1,
  SEQTEACH_STATUS_INVALID_ARGUMENT = 2,
  SEQTEACH_STATUS_DATA_ERROR = 3,
  SEQTEACH_STATUS_RUNTIME_ERROR = 4,
  SEQTEACH_STATUS_PANIC = 5,
} SeqteachStatus;

// Opaque learner handle.
typedef struct SeqteachLearner SeqteachLearner;

// Opaque vocabulary handle.
typedef struct SeqteachVocabulary SeqteachVocabulary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Copy the calling thread's last error message into `buf` (NUL
// terminated, truncated to `len`). Returns the full message length.
//
// # Safety
// `buf` must be null or point to `len` writable bytes.
size_t seqteach_last_error(char *buf, size_t len);

// Generate a synthetic lexicon.
//
// # Safety
// `out` must point to writable storage for one handle pointer.
enum SeqteachStatus seqteach_vocabulary_synthetic(size_t n_words,
                                                  double exception_rate,
                                                  uint64_t seed,
                                                  struct SeqteachVocabulary **out);

// Parse a vocabulary TSV with the built-in phoneme inventory. Any bad row
// fails the whole call.
//
// # Safety
// `tsv` must be a NUL-terminated UTF-8 string; `out` must be writable.
enum SeqteachStatus seqteach_vocabulary_parse(const char *tsv, struct SeqteachVocabulary **out);

// Number of words, or 0 for a null handle.
//
// # Safety
// `vocab` must be null or a live handle.
size_t seqteach_vocabulary_len(const struct SeqteachVocabulary *vocab);

// # Safety
// `vocab` must be null or a handle not yet freed.
void seqteach_vocabulary_free(struct SeqteachVocabulary *vocab);

// A fresh reading-model learner with default hyperparameters.
//
// # Safety
// `out` must be writable.
enum SeqteachStatus seqteach_learner_new(uint64_t seed, struct SeqteachLearner **out);

// # Safety
// `learner` must be null or a handle not yet freed.
void seqteach_learner_free(struct SeqteachLearner *learner);

// Train on the words `sequence[0..n]` (vocabulary indices), one online
// step each.
//
// # Safety
// Handles must be live; `sequence` must point to `n` indices.
enum SeqteachStatus seqteach_learner_train(struct SeqteachLearner *learner,
                                           const struct SeqteachVocabulary *vocab,
                                           const size_t *sequence,
                                           size_t n);

// Fraction of the words `test[0..n]` read incorrectly.
//
// # Safety
// Handles must be live; `test` must point to `n` indices; `cost` writable.
enum SeqteachStatus seqteach_learner_terminal_cost(const struct SeqteachLearner *learner,
                                                   const struct SeqteachVocabulary *vocab,
                                                   const size_t *test,
                                                   size_t n,
                                                   double *cost);

// Spearman rank correlation with a two-sided p-value.
//
// # Safety
// `xs` and `ys` must point to `n` values; `rho` and `p` must be writable.
enum SeqteachStatus seqteach_spearman(const double *xs,
                                      const double *ys,
                                      size_t n,
                                      double *rho,
                                      double *p);

// Welch two-sample t-test, two-sided.
//
// # Safety
// `xs` must point to `nx` values and `ys` to `ny`; `t` and `p` writable.
enum SeqteachStatus seqteach_welch_t_test(const double *xs,
                                          size_t nx,
                                          const double *ys,
                                          size_t ny,
                                          double *t,
                                          double *p);

// Library version as a static NUL-terminated string.
const char *seqteach_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SEQTEACH_H */
