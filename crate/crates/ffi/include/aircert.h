/* C interface for the aircert certification engine. */

#ifndef AIRCERT_H
#define AIRCERT_H

/* Generated by cbindgen from crates/ffi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status code returned by every fallible function.
 */
typedef enum AircertStatus {
  AIRCERT_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  AIRCERT_STATUS_NULL_ARGUMENT = 1,
  /**
   * A string argument was not valid UTF-8.
   */
  AIRCERT_STATUS_INVALID_UTF8 = 2,
  /**
   * Input could not be parsed.
   */
  AIRCERT_STATUS_PARSE_ERROR = 3,
  /**
   * Input parsed but violated a schema invariant.
   */
  AIRCERT_STATUS_SCHEMA_VIOLATION = 4,
  /**
   * Stored bundle checksum did not match the recomputed one.
   */
  AIRCERT_STATUS_CHECKSUM_MISMATCH = 5,
  /**
   * Weight registry lookup or validation failed.
   */
  AIRCERT_STATUS_REGISTRY_ERROR = 6,
  /**
   * Scoring failed (missing activities, bad weights, ...).
   */
  AIRCERT_STATUS_SCORING_ERROR = 7,
  /**
   * A check precondition failed.
   */
  AIRCERT_STATUS_CHECK_ERROR = 8,
  /**
   * File could not be read.
   */
  AIRCERT_STATUS_IO_ERROR = 9,
  AIRCERT_STATUS_INTERNAL_ERROR = 10,
} AircertStatus;

/**
 * Opaque handle to a loaded, validated evidence bundle.
 */
typedef struct AircertBundle AircertBundle;

/**
 * Opaque handle to a built assurance profile.
 */
typedef struct AircertProfile AircertProfile;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Engine version as a static string; never freed by the caller.
 */
const char *aircert_version(void);

/**
 * Message describing the most recent error on this thread, or null.
 * The caller owns the returned string (free with `aircert_string_free`).
 */
char *aircert_last_error_message(void);

/**
 * Frees a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must have been returned by this library and not freed before.
 */
void aircert_string_free(char *s);

/**
 * Parses a classification triple like `D/2A/3`. On success writes the
 * required validation level (1-3) through `out_validation_level`.
 *
 * # Safety
 * `triple` must be a valid NUL-terminated string; `out_validation_level`
 * must be a valid pointer.
 */
enum AircertStatus aircert_classify(const char *triple, int *out_validation_level);

/**
 * Parses and validates an evidence bundle from JSON text.
 *
 * # Safety
 * `json` must be a valid NUL-terminated string; `out` must be a valid
 * pointer. On success `*out` owns the bundle until `aircert_bundle_free`.
 */
enum AircertStatus aircert_bundle_parse_json(const char *json, struct AircertBundle **out);

/**
 * Loads and validates an evidence bundle from a file path.
 *
 * # Safety
 * `path` must be a valid NUL-terminated string; `out` must be a valid
 * pointer. On success `*out` owns the bundle until `aircert_bundle_free`.
 */
enum AircertStatus aircert_bundle_load_file(const char *path, struct AircertBundle **out);

/**
 * Frees a bundle handle. Null is ignored.
 *
 * # Safety
 * `bundle` must have been returned by this library and not freed before.
 */
void aircert_bundle_free(struct AircertBundle *bundle);

/**
 * Builds the assurance profile for a bundle.
 *
 * `weights_json` and `config_json` may be null for the built-in registry and
 * default configuration. `fixed_clock` (RFC 3339) may be null for the system
 * clock (the AIRCERT_FIXED_CLOCK environment variable still applies).
 *
 * # Safety
 * `bundle` must be a live handle from this library; string arguments must be
 * null or valid NUL-terminated strings; `out` must be a valid pointer. On
 * success `*out` owns the profile until `aircert_profile_free`.
 */
enum AircertStatus aircert_certify(const struct AircertBundle *bundle,
                                   const char *weights_json,
                                   const char *config_json,
                                   const char *fixed_clock,
                                   struct AircertProfile **out);

/**
 * Frees a profile handle. Null is ignored.
 *
 * # Safety
 * `profile` must have been returned by this library and not freed before.
 */
void aircert_profile_free(struct AircertProfile *profile);

/**
 * Final certification score in [0, 100], or -1.0 for a null handle.
 *
 * # Safety
 * `profile` must be null or a live handle from this library.
 */
double aircert_profile_final_score(const struct AircertProfile *profile);

/**
 * Verdict: 0 not certified, 1 certified with moderate confidence,
 * 2 certified with high confidence; -1 for a null handle.
 *
 * # Safety
 * `profile` must be null or a live handle from this library.
 */
int aircert_profile_verdict(const struct AircertProfile *profile);

/**
 * Confidence band: 0 insufficient, 1 limited, 2 moderate, 3 strong,
 * 4 optimal; -1 for a null handle.
 *
 * # Safety
 * `profile` must be null or a live handle from this library.
 */
int aircert_profile_band(const struct AircertProfile *profile);

/**
 * Renders the profile as canonical JSON into a caller-owned string.
 *
 * # Safety
 * `profile` must be a live handle from this library; `out` must be valid.
 */
enum AircertStatus aircert_profile_render_json(const struct AircertProfile *profile, char **out);

/**
 * Renders the profile as Markdown into a caller-owned string.
 *
 * # Safety
 * `profile` must be a live handle from this library; `out` must be valid.
 */
enum AircertStatus aircert_profile_render_markdown(const struct AircertProfile *profile,
                                                   char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* AIRCERT_H */
