#ifndef FEN_FFI_H
#define FEN_FFI_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum FenStatus {
  FEN_STATUS_OK = 0,
  FEN_STATUS_NULL_POINTER = 1,
  FEN_STATUS_INVALID_UTF8 = 2,
  FEN_STATUS_PARSE_ERROR = 3,
  FEN_STATUS_INVALID_ARGUMENT = 4,
  FEN_STATUS_TOO_LARGE = 5,
  FEN_STATUS_BUDGET_EXHAUSTED = 6,
  FEN_STATUS_PANIC = 7,
} FenStatus;

/**
 * Opaque game handle.
 */
typedef struct FenGameHandle FenGameHandle;

/**
 * Opaque coalition-structure handle.
 */
typedef struct FenPartitionHandle FenPartitionHandle;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Parses a game in the `fen 1 n d f e` text format.
 *
 * # Safety
 * `text` must be a NUL-terminated string; `out` must be writable.
 */
enum FenStatus fen_game_parse(const char *text, struct FenGameHandle **out);

/**
 * Releases a game handle. Null is ignored.
 *
 * # Safety
 * `game` must come from this library and not be used afterwards.
 */
void fen_game_free(struct FenGameHandle *game);

/**
 * Number of players, or 0 for a null handle.
 *
 * # Safety
 * `game` must be null or a live handle.
 */
size_t fen_game_player_count(const struct FenGameHandle *game);

/**
 * Serializes a game back to its text format.
 *
 * # Safety
 * `game` must be a live handle; `out` must be writable.
 */
enum FenStatus fen_game_to_text(const struct FenGameHandle *game, char **out);

/**
 * Parses a partition in the `partition n c` text format.
 *
 * # Safety
 * `text` must be a NUL-terminated string; `out` must be writable.
 */
enum FenStatus fen_partition_parse(const char *text, struct FenPartitionHandle **out);

/**
 * Releases a partition handle. Null is ignored.
 *
 * # Safety
 * `partition` must come from this library and not be used afterwards.
 */
void fen_partition_free(struct FenPartitionHandle *partition);

/**
 * Decides stability exactly. Writes the verdict to `stable` and, when
 * `json_out` is non-null, the certificate as JSON.
 *
 * # Safety
 * Handles must be live; `concept` NUL-terminated; `stable` writable.
 */
enum FenStatus fen_exact_verify(const struct FenGameHandle *game,
                                const struct FenPartitionHandle *partition,
                                const char *concept_name,
                                size_t c,
                                bool *stable,
                                char **json_out);

/**
 * One run of the verification tester. Writes whether it rejected and, when
 * `json_out` is non-null, the verdict with sample and query ledger.
 *
 * # Safety
 * Handles must be live; `concept` NUL-terminated; `rejected` writable.
 */
enum FenStatus fen_verification_test(const struct FenGameHandle *game,
                                     const struct FenPartitionHandle *partition,
                                     const char *concept_name,
                                     double epsilon,
                                     size_t c,
                                     uint64_t seed,
                                     bool *rejected,
                                     char **json_out);

/**
 * One run of the perfect-existence tester; `c` must be positive.
 *
 * # Safety
 * `game` must be live; `rejected` writable.
 */
enum FenStatus fen_existence_test(const struct FenGameHandle *game,
                                  double epsilon,
                                  size_t c,
                                  uint64_t seed,
                                  bool *rejected,
                                  char **json_out);

/**
 * Repairs every witness; writes the edit script (one operation per line)
 * and its length.
 *
 * # Safety
 * Handles must be live; `concept` NUL-terminated; outputs writable.
 */
enum FenStatus fen_repair(const struct FenGameHandle *game,
                          const struct FenPartitionHandle *partition,
                          const char *concept_name,
                          size_t c,
                          size_t *length,
                          char **script_out);

/**
 * Generates an instance of a named family. `partition_out` receives null
 * for families without a partition; `certificate_out` may be null.
 *
 * # Safety
 * `family` NUL-terminated; `game_out` and `partition_out` writable.
 */
enum FenStatus fen_generate(const char *family,
                            size_t n,
                            size_t d,
                            size_t c,
                            uint64_t seed,
                            struct FenGameHandle **game_out,
                            struct FenPartitionHandle **partition_out,
                            char **certificate_out);

/**
 * `⌈ln 3 / ε⌉`, or 0 when `epsilon` is outside `(0, 1]`.
 */
size_t fen_sample_size(double epsilon);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not be used afterwards.
 */
void fen_string_free(char *s);

/**
 * Message of the last failed call on this thread, or null. Valid until the
 * next call into the library on the same thread.
 */
const char *fen_last_error_message(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FEN_FFI_H */
