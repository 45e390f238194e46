#ifndef LABHH_H
#define LABHH_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

/**
 * Bit for each operator in [`LabhhRunConfig::operator_mask`].
 */
#define LABHH_OP_TWO_OPT 1

#define LABHH_OP_SWAP 2

#define LABHH_OP_RELOCATE 4

#define LABHH_OP_OR_OPT2 8

#define LABHH_OP_ALL 15

typedef enum LabhhAcceptance {
  LABHH_ACCEPTANCE_GREEDY = 0,
  LABHH_ACCEPTANCE_ANNEALING = 1,
} LabhhAcceptance;

typedef enum LabhhController {
  LABHH_CONTROLLER_LIN_UCB = 0,
  LABHH_CONTROLLER_UCB1 = 1,
  LABHH_CONTROLLER_RANDOM = 2,
} LabhhController;

typedef enum LabhhFamily {
  LABHH_FAMILY_UNIFORM = 0,
  LABHH_FAMILY_CLUSTERED = 1,
  LABHH_FAMILY_CORRIDOR = 2,
  LABHH_FAMILY_GRID_JITTER = 3,
  LABHH_FAMILY_MIXED_DENSITY = 4,
} LabhhFamily;

typedef enum LabhhFeatureMask {
  LABHH_FEATURE_MASK_FULL = 0,
  LABHH_FEATURE_MASK_NO_STATIC = 1,
  LABHH_FEATURE_MASK_NO_DYNAMIC = 2,
  LABHH_FEATURE_MASK_NO_CONTEXT = 3,
} LabhhFeatureMask;

/**
 * Status code returned by every fallible function.
 */
typedef enum LabhhStatus {
  LABHH_STATUS_OK = 0,
  LABHH_STATUS_INVALID_ARGUMENT = 1,
  LABHH_STATUS_NULL_POINTER = 2,
  LABHH_STATUS_IO = 3,
  LABHH_STATUS_PARSE = 4,
  LABHH_STATUS_BUFFER_TOO_SMALL = 5,
  LABHH_STATUS_INTERNAL = 6,
  LABHH_STATUS_PANIC = 7,
} LabhhStatus;

/**
 * Opaque instance handle.
 */
typedef struct LabhhInstance LabhhInstance;

/**
 * Opaque run result handle.
 */
typedef struct LabhhRunResult LabhhRunResult;

typedef struct LabhhStaticFeatures {
  double size_norm;
  double nn_mean;
  double nn_dispersion;
  double anisotropy;
  double radial_dispersion;
  double mst_per_node;
} LabhhStaticFeatures;

/**
 * Hyper-heuristic run configuration; start from [`labhh_run_config_default`].
 */
typedef struct LabhhRunConfig {
  uint64_t budget;
  enum LabhhController controller;
  enum LabhhAcceptance acceptance;
  bool gate_enabled;
  enum LabhhFeatureMask feature_mask;
  /**
   * Bitwise OR of `LABHH_OP_*`; operators run in the fixed order
   * two-opt, swap, relocate, or-opt2.
   */
  uint32_t operator_mask;
  uint64_t seed;
  double alpha;
  uint64_t window;
  uint64_t stagnation_window;
  double p_gate;
  double annealing_start_fraction;
  double annealing_end_fraction;
} LabhhRunConfig;

typedef struct LabhhTracePoint {
  uint64_t iteration;
  double best_length;
} LabhhTracePoint;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *labhh_version(void);

/**
 * Message of the last failure on this thread, or NULL if none. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *labhh_last_error_message(void);

/**
 * Generates a seeded instance.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for one handle.
 */
enum LabhhStatus labhh_instance_generate(enum LabhhFamily family,
                                         size_t n,
                                         uint64_t seed,
                                         struct LabhhInstance **out);

/**
 * Builds an instance from `n` interleaved `x, y` pairs in the unit square.
 *
 * # Safety
 * `xy` must point to `2 * n` readable doubles; `out` must be writable.
 */
enum LabhhStatus labhh_instance_from_points(const double *xy, size_t n, struct LabhhInstance **out);

/**
 * Loads an instance JSON file.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
enum LabhhStatus labhh_instance_load(const char *path, struct LabhhInstance **out);

/**
 * Writes an instance JSON file.
 *
 * # Safety
 * `inst` must be a live handle and `path` a NUL-terminated string.
 */
enum LabhhStatus labhh_instance_save(const struct LabhhInstance *inst, const char *path);

/**
 * Number of sites, 0 for NULL.
 *
 * # Safety
 * `inst` must be NULL or a live handle.
 */
size_t labhh_instance_len(const struct LabhhInstance *inst);

/**
 * Copies the coordinates as interleaved `x, y` pairs into `out_xy`.
 *
 * # Safety
 * `inst` must be a live handle; `out_xy` must have room for `cap` doubles.
 */
enum LabhhStatus labhh_instance_points(const struct LabhhInstance *inst,
                                       double *out_xy,
                                       size_t cap);

/**
 * # Safety
 * `inst` must be NULL or a handle not yet freed.
 */
void labhh_instance_free(struct LabhhInstance *inst);

/**
 * Computes the six static landscape features (needs at least 3 sites).
 *
 * # Safety
 * `inst` must be a live handle and `out` writable.
 */
enum LabhhStatus labhh_static_features(const struct LabhhInstance *inst,
                                       struct LabhhStaticFeatures *out);

/**
 * Default LA-BHH configuration.
 */
struct LabhhRunConfig labhh_run_config_default(void);

/**
 * Runs the configured hyper-heuristic (needs at least 5 sites).
 *
 * # Safety
 * `inst` must be a live handle, `cfg` readable and `out` writable.
 */
enum LabhhStatus labhh_run(const struct LabhhInstance *inst,
                           const struct LabhhRunConfig *cfg,
                           struct LabhhRunResult **out);

/**
 * Runs a method or variant by its benchmark name (`labhh`, `ucb-hh`,
 * `random-hh`, `nn`, `two-opt`, `sa`, `ils`, `ga`, `labhh-<variant>`) with
 * default hyperparameters.
 *
 * # Safety
 * `inst` must be a live handle, `method` NUL-terminated and `out` writable.
 */
enum LabhhStatus labhh_run_method(const struct LabhhInstance *inst,
                                  const char *method,
                                  uint64_t budget,
                                  uint64_t seed,
                                  struct LabhhRunResult **out);

/**
 * # Safety
 * `res` must be NULL or a handle not yet freed.
 */
void labhh_result_free(struct LabhhRunResult *res);

/**
 * Best tour length, NaN for NULL.
 *
 * # Safety
 * `res` must be NULL or a live handle.
 */
double labhh_result_best_length(const struct LabhhRunResult *res);

/**
 * Multi-start nearest-neighbour length the run started from, NaN for NULL.
 *
 * # Safety
 * `res` must be NULL or a live handle.
 */
double labhh_result_initial_length(const struct LabhhRunResult *res);

/**
 * Number of sites in the best tour, 0 for NULL.
 *
 * # Safety
 * `res` must be NULL or a live handle.
 */
size_t labhh_result_len(const struct LabhhRunResult *res);

/**
 * Copies the best tour into `out[..cap]`.
 *
 * # Safety
 * `res` must be a live handle; `out` must have room for `cap` elements.
 */
enum LabhhStatus labhh_result_best_order(const struct LabhhRunResult *res, size_t *out, size_t cap);

/**
 * Number of trace checkpoints, 0 for NULL.
 *
 * # Safety
 * `res` must be NULL or a live handle.
 */
size_t labhh_result_trace_len(const struct LabhhRunResult *res);

/**
 * Copies the best-so-far trace into `out[..cap]`.
 *
 * # Safety
 * `res` must be a live handle; `out` must have room for `cap` elements.
 */
enum LabhhStatus labhh_result_trace(const struct LabhhRunResult *res,
                                    struct LabhhTracePoint *out,
                                    size_t cap);

/**
 * Writes per-operator selection counts (two-opt, swap, relocate, or-opt2)
 * into `out[0..4]`.
 *
 * # Safety
 * `res` must be a live handle; `out` must have room for 4 elements.
 */
enum LabhhStatus labhh_result_operator_counts(const struct LabhhRunResult *res, uint64_t *out);

/**
 * Serializes the result to JSON; free the string with [`labhh_string_free`].
 *
 * # Safety
 * `res` must be a live handle and `out` writable.
 */
enum LabhhStatus labhh_result_to_json(const struct LabhhRunResult *res, char **out);

/**
 * # Safety
 * `s` must be NULL or a string returned by this library and not yet freed.
 */
void labhh_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LABHH_H */
