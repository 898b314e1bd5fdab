#ifndef MERISC_H
#define MERISC_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum MeriscStatus {
  MERISC_STATUS_OK = 0,
  MERISC_STATUS_NULL_POINTER = 1,
  MERISC_STATUS_INVALID_ARGUMENT = 2,
  MERISC_STATUS_CONFIG_ERROR = 3,
  MERISC_STATUS_RUNTIME_ERROR = 4,
  MERISC_STATUS_IO_ERROR = 5,
  MERISC_STATUS_PANIC = 6,
} MeriscStatus;

typedef enum MeriscVariant {
  MERISC_VARIANT_ME_RISC = 0,
  MERISC_VARIANT_GA_RISC = 1,
  MERISC_VARIANT_NO_RIS = 2,
  MERISC_VARIANT_RIS_ONLY = 3,
} MeriscVariant;

// Per-step outcome of simulating one variant.
typedef struct MeriscRun MeriscRun;

// Parsed configuration, geometry, state table and user trajectory.
typedef struct MeriscSetup MeriscSetup;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failure on this thread, or null. Valid until the next failing call.
const char *merisc_last_error(void);

// Library version as a static NUL-terminated string.
const char *merisc_version(void);

// Loads a TOML run configuration and builds the trajectory for `seed`.
//
// # Safety
// `path` must be a NUL-terminated string and `out` a valid pointer.
enum MeriscStatus merisc_setup_load(const char *path, uint64_t seed, struct MeriscSetup **out);

// # Safety
// `setup` must come from [`merisc_setup_load`] and not be used afterwards. Null is ignored.
void merisc_setup_free(struct MeriscSetup *setup);

// # Safety
// `setup` must be a live handle or null.
size_t merisc_setup_num_steps(const struct MeriscSetup *setup);

// # Safety
// `setup` must be a live handle or null.
size_t merisc_setup_num_users(const struct MeriscSetup *setup);

// Number of RIS meta-atoms, the length of a configuration.
//
// # Safety
// `setup` must be a live handle or null.
size_t merisc_setup_num_patches(const struct MeriscSetup *setup);

// Number of states per meta-atom; states are numbered from 1.
//
// # Safety
// `setup` must be a live handle or null.
uint16_t merisc_setup_num_states(const struct MeriscSetup *setup);

// Worst-user throughput (bit/s/Hz) of `states` at time step `step` (1-based).
//
// # Safety
// `setup` must be a live handle, `states` must point to `len` readable values
// and `worst` must be a valid pointer.
enum MeriscStatus merisc_setup_evaluate(const struct MeriscSetup *setup,
                                        size_t step,
                                        const uint16_t *states,
                                        size_t len,
                                        double *worst);

// Simulates every step of the trajectory with one variant.
//
// # Safety
// `setup` must be a live handle and `out` a valid pointer.
enum MeriscStatus merisc_run(const struct MeriscSetup *setup,
                             enum MeriscVariant variant,
                             uint64_t seed,
                             struct MeriscRun **out);

// # Safety
// `run` must come from [`merisc_run`] and not be used afterwards. Null is ignored.
void merisc_run_free(struct MeriscRun *run);

// # Safety
// `run` must be a live handle or null.
size_t merisc_run_num_steps(const struct MeriscRun *run);

// Time-averaged worst-user throughput (bit/s/Hz), NaN for a null handle.
//
// # Safety
// `run` must be a live handle or null.
double merisc_run_mean_worst(const struct MeriscRun *run);

// Worst-user throughput of step `index` (0-based), NaN when out of range.
//
// # Safety
// `run` must be a live handle or null.
double merisc_run_worst(const struct MeriscRun *run, size_t index);

// Copies the configuration chosen at step `index` (0-based) into `states`.
//
// Writes the configuration length to `written`; fails with `InvalidArgument`
// when `len` is too small, in which case `written` holds the required length.
//
// # Safety
// `run` must be a live handle, `states` must point to `len` writable values
// and `written` must be a valid pointer.
enum MeriscStatus merisc_run_config(const struct MeriscRun *run,
                                    size_t index,
                                    uint16_t *states,
                                    size_t len,
                                    size_t *written);

// Writes the per-step results table as CSV.
//
// # Safety
// `run` must be a live handle and `path` a NUL-terminated string.
enum MeriscStatus merisc_run_write_csv(const struct MeriscRun *run, const char *path);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MERISC_H */
