#ifndef SMFORGE_H
#define SMFORGE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

#define SMF_OK 0

#define SMF_ERR_NULL 1

#define SMF_ERR_UTF8 2

#define SMF_ERR_PARSE 3

#define SMF_ERR_REJECTED 4

#define SMF_ERR_PANIC 5

#define SMF_LEVEL_M 0

#define SMF_LEVEL_G 1

/**
 * Opaque machine handle.
 */
typedef struct SmfMachine SmfMachine;

/**
 * Opaque presentation handle.
 */
typedef struct SmfPresentation SmfPresentation;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread (empty after a success). Valid until the next
 * call on the same thread.
 */
const char *smf_last_error(void);

/**
 * # Safety
 * `s` must be null or a string returned by this library.
 */
void smf_string_free(char *s);

/**
 * The shifting machine over `n_letters` input letters.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
int32_t smf_machine_m1(uintptr_t n_letters, SmfMachine **out);

/**
 * Parses a machine in the line format.
 *
 * # Safety
 * `src` must be a NUL-terminated string and `out` a valid pointer.
 */
int32_t smf_machine_parse(const char *src, SmfMachine **out);

/**
 * # Safety
 * `m` must be null or a handle from this library, not yet freed.
 */
void smf_machine_free(SmfMachine *m);

/**
 * # Safety
 * `m` must be a live handle and `out` a valid pointer.
 */
int32_t smf_machine_format(const SmfMachine *m, char **out);

/**
 * Applies `history` to the configuration `word` and returns the final configuration.
 *
 * # Safety
 * `m` must be a live handle, the strings NUL-terminated and `out` a valid pointer.
 */
int32_t smf_machine_run(const SmfMachine *m, const char *word, const char *history, char **out);

/**
 * Shift of a first-sector word of the shifting machine over `n_letters` letters. Writes the
 * history text and its length; `SMF_ERR_REJECTED` when the word is not shiftable.
 *
 * # Safety
 * `word` must be NUL-terminated; `out_history` and `out_len` valid pointers.
 */
int32_t smf_shift(uintptr_t n_letters, const char *word, char **out_history, uintptr_t *out_len);

/**
 * Presentation of the machine's group; `level` is `SMF_LEVEL_M` or `SMF_LEVEL_G`.
 *
 * # Safety
 * `m` must be a live handle and `out` a valid pointer.
 */
int32_t smf_presentation_emit(const SmfMachine *m, int32_t level, SmfPresentation **out);

/**
 * Number of relators, or 0 for a null handle.
 *
 * # Safety
 * `p` must be null or a live handle.
 */
uintptr_t smf_presentation_len(const SmfPresentation *p);

/**
 * Relators one per line, followed by the count summary.
 *
 * # Safety
 * `p` must be a live handle and `out` a valid pointer.
 */
int32_t smf_presentation_format(const SmfPresentation *p, char **out);

/**
 * # Safety
 * `p` must be null or a handle from this library, not yet freed.
 */
void smf_presentation_free(SmfPresentation *p);

/**
 * Dehn bound at `n` for the desk parameters and a linear time bound `1 + n`, in closed form.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
int32_t smf_dehn_bound(uint64_t n, char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SMFORGE_H */
