#ifndef FOCKFORGE_H
#define FOCKFORGE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Device families accepted by `ff_device_new`.
typedef enum FfDeviceKind {
  FF_DEVICE_KIND_BELL = 0,
  FF_DEVICE_KIND_GHZ = 1,
  FF_DEVICE_KIND_FUSION = 2,
} FfDeviceKind;

// Result of every call.
typedef enum FfStatus {
  FF_STATUS_OK = 0,
  FF_STATUS_NULL_POINTER = 1,
  FF_STATUS_INVALID_ARGUMENT = 2,
  FF_STATUS_PARSE = 3,
  FF_STATUS_CONVERSION = 4,
  FF_STATUS_RESOURCE = 5,
  FF_STATUS_INTERNAL = 6,
} FfStatus;

// A measurement device with its grouped Kraus table.
typedef struct FfDevice FfDevice;

// A compiled linear-optics scheme with its metrics.
typedef struct FfScheme FfScheme;

// An exact probability `numerator / denominator`, or `denominator == 0`
// when only `value` is known.
typedef struct FfProbability {
  int64_t numerator;
  int64_t denominator;
  double value;
} FfProbability;

// Outcome of `ff_scheme_verify`.
typedef struct FfVerifyReport {
  bool passed;
  size_t branches;
  double total_probability;
  double worst_fidelity;
} FfVerifyReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or null. Valid until the
// next call on the same thread.
const char *ff_last_error(void);

// Builds a device. `kind` is an `FfDeviceKind`; `n` is ignored for Bell
// analysers; `boost` lists `boost_len` qubits that get an SQA-beta unit.
//
// # Safety
// `boost` must point to `boost_len` readable values (or be null when
// `boost_len` is 0) and `out` must be writable.
enum FfStatus ff_device_new(int32_t kind,
                            size_t n,
                            const size_t *boost,
                            size_t boost_len,
                            struct FfDevice **out);

// # Safety
// `device` must come from `ff_device_new` and not be used afterwards.
void ff_device_free(struct FfDevice *device);

// Lossless success probability.
//
// # Safety
// `device` must be a live handle and `out` writable.
enum FfStatus ff_device_success_probability(const struct FfDevice *device,
                                            struct FfProbability *out);

// Number of grouped Kraus operators, and how many of them herald success.
//
// # Safety
// `device` must be a live handle; the out-pointers must be writable.
enum FfStatus ff_device_kraus_count(const struct FfDevice *device,
                                    size_t *total,
                                    size_t *successes);

// Success probability of an analyser whose detectors and sources each
// work with probability `eta`.
//
// # Safety
// `device` must be a live handle and `out` writable.
enum FfStatus ff_device_lossy_probability(const struct FfDevice *device, double eta, double *out);

// Compiles diagram JSON into a scheme.
//
// # Safety
// `diagram_json` must be a NUL-terminated string and `out` writable.
enum FfStatus ff_scheme_compile(const char *diagram_json, struct FfScheme **out);

// Loads a scheme file previously written by `ff_scheme_to_json` or the CLI.
//
// # Safety
// `scheme_json` must be a NUL-terminated string and `out` writable.
enum FfStatus ff_scheme_from_json(const char *scheme_json, struct FfScheme **out);

// # Safety
// `scheme` must come from this library and not be used afterwards.
void ff_scheme_free(struct FfScheme *scheme);

// Product of the device success probabilities.
//
// # Safety
// `scheme` must be a live handle and `out` writable.
enum FfStatus ff_scheme_success_probability(const struct FfScheme *scheme,
                                            struct FfProbability *out);

// Seed photons plus auxiliary photons, and whether every loss is heralded.
//
// # Safety
// `scheme` must be a live handle; the out-pointers must be writable.
enum FfStatus ff_scheme_resources(const struct FfScheme *scheme,
                                  size_t *photons,
                                  bool *fully_loss_detecting);

// Scheme JSON including metrics. Release the string with `ff_string_free`.
//
// # Safety
// `scheme` must be a live handle and `out` writable.
enum FfStatus ff_scheme_to_json(const struct FfScheme *scheme, char **out);

// # Safety
// `s` must come from this library and not be used afterwards.
void ff_string_free(char *s);

// Simulates every success branch and compares the output with `target`:
// `"ghz:N"`, `"ring:N"` or `"source"`. `max_photons` of 0 means 16.
//
// # Safety
// `scheme` must be a live handle, `target` a NUL-terminated string and
// `out` writable.
enum FfStatus ff_scheme_verify(const struct FfScheme *scheme,
                               const char *target,
                               size_t max_photons,
                               struct FfVerifyReport *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FOCKFORGE_H */
