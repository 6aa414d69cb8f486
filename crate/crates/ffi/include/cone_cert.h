#ifndef CONE_CERT_H
#define CONE_CERT_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum ConeStatus {
  CONE_STATUS_OK = 0,
  CONE_STATUS_VERIFY_FAILED = 1,
  CONE_STATUS_INCONCLUSIVE = 2,
  CONE_STATUS_NULL_POINTER = 3,
  CONE_STATUS_INVALID_UTF8 = 4,
  CONE_STATUS_PARSE_ERROR = 5,
  CONE_STATUS_INVALID_ARGUMENT = 6,
  CONE_STATUS_INTERNAL = 7,
} ConeStatus;

/**
 * Opaque certificate handle.
 */
typedef struct ConeCertificate ConeCertificate;

/**
 * Opaque form handle.
 */
typedef struct ConeForm ConeForm;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or NULL. Valid until the next call.
 */
const char *cone_last_error(void);

/**
 * # Safety
 * `s` must come from this library and not have been freed.
 */
void cone_string_free(char *s);

/**
 * Library version; free with `cone_string_free`.
 */
char *cone_version(void);

/**
 * `dim ker G` for `(n, d)`, or -1 on invalid dims.
 */
int64_t cone_kernel_dim(size_t n, uint32_t d);

/**
 * Parses `text`; `nvars = 0` infers the variable count.
 *
 * # Safety
 * `text` is a NUL-terminated string and `out` is writable.
 */
enum ConeStatus cone_form_parse(const char *text, size_t nvars, struct ConeForm **out);

/**
 * Looks up a catalog entry by name.
 *
 * # Safety
 * `name` is a NUL-terminated string and `out` is writable.
 */
enum ConeStatus cone_form_catalog(const char *name, struct ConeForm **out);

/**
 * # Safety
 * `form` comes from this library and is not used afterwards.
 */
void cone_form_free(struct ConeForm *form);

/**
 * Canonical text; free with `cone_string_free`. NULL when `form` is NULL.
 *
 * # Safety
 * `form` is a live handle or NULL.
 */
char *cone_form_to_string(const struct ConeForm *form);

/**
 * # Safety
 * `form` is a live handle or NULL.
 */
size_t cone_form_nvars(const struct ConeForm *form);

/**
 * # Safety
 * `form` is a live handle or NULL.
 */
uint32_t cone_form_degree(const struct ConeForm *form);

/**
 * Membership at `level` using the catalog Gram matrix or, failing that, an SOS search.
 * Returns `Inconclusive` when no certificate is found.
 *
 * # Safety
 * `form` is a live handle and `out` is writable.
 */
enum ConeStatus cone_certify(const struct ConeForm *form,
                             size_t level,
                             struct ConeCertificate **out);

/**
 * Refutation at `level` with the default strategy ladder.
 *
 * # Safety
 * `form` is a live handle and `out` is writable.
 */
enum ConeStatus cone_refute(const struct ConeForm *form,
                            size_t level,
                            uint64_t seed,
                            struct ConeCertificate **out);

/**
 * Brackets the smallest level: `*lo` certified lower bound, `*hi` certified upper bound
 * or -1. Returns `Inconclusive` when `lo != hi`.
 *
 * # Safety
 * `form` is a live handle; `lo` and `hi` are writable.
 */
enum ConeStatus cone_classify(const struct ConeForm *form, uint64_t seed, int64_t *lo, int64_t *hi);

/**
 * # Safety
 * `json` is a NUL-terminated string and `out` is writable.
 */
enum ConeStatus cone_certificate_from_json(const char *json, struct ConeCertificate **out);

/**
 * Certificate JSON; free with `cone_string_free`.
 *
 * # Safety
 * `cert` is a live handle or NULL.
 */
char *cone_certificate_to_json(const struct ConeCertificate *cert);

/**
 * Full exact re-check: `Ok` or `VerifyFailed`.
 *
 * # Safety
 * `cert` is a live handle.
 */
enum ConeStatus cone_certificate_verify(const struct ConeCertificate *cert);

/**
 * 1 for membership, 0 for refutation, -1 for NULL.
 *
 * # Safety
 * `cert` is a live handle or NULL.
 */
int32_t cone_certificate_is_membership(const struct ConeCertificate *cert);

/**
 * # Safety
 * `cert` is a live handle or NULL.
 */
int64_t cone_certificate_level(const struct ConeCertificate *cert);

/**
 * # Safety
 * `cert` comes from this library and is not used afterwards.
 */
void cone_certificate_free(struct ConeCertificate *cert);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CONE_CERT_H */
