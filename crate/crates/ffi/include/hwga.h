#ifndef HWGA_H
#define HWGA_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum HwgaStatus {
  HWGA_STATUS_OK = 0,
  HWGA_STATUS_NULL_POINTER = 1,
  HWGA_STATUS_INVALID_ARGUMENT = 2,
  HWGA_STATUS_CONFIG = 3,
  HWGA_STATUS_PARSE = 4,
  HWGA_STATUS_IO = 5,
  HWGA_STATUS_CAPACITY = 6,
  HWGA_STATUS_RUNTIME = 7,
  HWGA_STATUS_PANIC = 8,
} HwgaStatus;

typedef enum HwgaMode {
  HWGA_MODE_MINIMIZE = 0,
  HWGA_MODE_MAXIMIZE = 1,
} HwgaMode;

/**
 * Opaque run configuration.
 */
typedef struct HwgaConfig HwgaConfig;

/**
 * Opaque stepping engine.
 */
typedef struct HwgaEngine HwgaEngine;

/**
 * Exhaustive optimum of a config's fitness datapath.
 */
typedef struct HwgaOptimum {
  uint32_t best_word;
  int64_t best_raw;
  double best_fitness;
  int64_t px;
  int64_t qx;
} HwgaOptimum;

/**
 * Statistics of one evaluated generation.
 */
typedef struct HwgaRecord {
  uint64_t generation;
  int64_t best_raw;
  double best_fitness;
  double mean_fitness;
  uint32_t best_word;
} HwgaRecord;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. The pointer is
 * valid until the next call into this library on the same thread.
 */
const char *hwga_last_error(void);

/**
 * One Galois step of the 32-bit LFSR. Zero is rejected.
 *
 * # Safety
 * `out` must be a valid pointer to a `u32`.
 */
enum HwgaStatus hwga_lfsr_step(uint32_t state, uint32_t *out);

/**
 * Writes `count` distinct nonzero seeds derived from `master`.
 *
 * # Safety
 * `out` must point to at least `count` writable `u32`s.
 */
enum HwgaStatus hwga_expand_seeds(uint64_t master, uint32_t *out, size_t count);

/**
 * Builds a config from a preset name (`f1`, `f2`, `f3`) or, when
 * `rom_dir` is non-null, from ROM files in that directory.
 *
 * # Safety
 * `function` and `rom_dir` must be null or valid C strings; `out` must be a
 * valid pointer.
 */
enum HwgaStatus hwga_config_new(const char *function,
                                const char *rom_dir,
                                size_t n,
                                uint32_t m,
                                struct HwgaConfig **out);

/**
 * Builds a config from a `key = value` config file.
 *
 * # Safety
 * `path` must be a valid C string; `out` must be a valid pointer.
 */
enum HwgaStatus hwga_config_from_file(const char *path, struct HwgaConfig **out);

/**
 * # Safety
 * `cfg` must be null or a handle from `hwga_config_new`/`hwga_config_from_file`
 * that has not been freed.
 */
void hwga_config_free(struct HwgaConfig *cfg);

/**
 * # Safety
 * `cfg` must be a live config handle.
 */
enum HwgaStatus hwga_config_set_generations(struct HwgaConfig *cfg, uint32_t k);

/**
 * # Safety
 * `cfg` must be a live config handle.
 */
enum HwgaStatus hwga_config_set_mutation_rate(struct HwgaConfig *cfg, double mr);

/**
 * # Safety
 * `cfg` must be a live config handle.
 */
enum HwgaStatus hwga_config_set_mode(struct HwgaConfig *cfg, enum HwgaMode mode);

/**
 * # Safety
 * `cfg` must be a live config handle.
 */
enum HwgaStatus hwga_config_set_seed(struct HwgaConfig *cfg, uint64_t seed);

/**
 * # Safety
 * `cfg` must be a live config handle.
 */
enum HwgaStatus hwga_config_set_sync_val(struct HwgaConfig *cfg, uint32_t sync_val);

/**
 * # Safety
 * `cfg` must be a live config handle.
 */
enum HwgaStatus hwga_config_set_single_variable(struct HwgaConfig *cfg, bool on);

/**
 * Writes the compiled ROMs into `dir`.
 *
 * # Safety
 * `cfg` must be a live config handle and `dir` a valid C string.
 */
enum HwgaStatus hwga_config_dump_roms(const struct HwgaConfig *cfg, const char *dir);

/**
 * Exhaustive optimum for the config's function and mode.
 *
 * # Safety
 * `cfg` must be a live config handle and `out` a valid pointer.
 */
enum HwgaStatus hwga_config_optimum(const struct HwgaConfig *cfg, struct HwgaOptimum *out);

/**
 * Runs all `K` generations and writes the CSV trace to `path`.
 *
 * # Safety
 * `cfg` must be a live config handle and `path` a valid C string.
 * `total_cycles` may be null.
 */
enum HwgaStatus hwga_run_to_csv(const struct HwgaConfig *cfg,
                                size_t run_id,
                                const char *path,
                                uint64_t *total_cycles);

/**
 * Seeds a new engine from the config. The config may be freed afterwards.
 *
 * # Safety
 * `cfg` must be a live config handle and `out` a valid pointer.
 */
enum HwgaStatus hwga_engine_new(const struct HwgaConfig *cfg, struct HwgaEngine **out);

/**
 * # Safety
 * `engine` must be null or a live engine handle.
 */
void hwga_engine_free(struct HwgaEngine *engine);

/**
 * Advances one generation; `record` receives the statistics of the
 * population that was evaluated. `record` may be null.
 *
 * # Safety
 * `engine` must be a live engine handle.
 */
enum HwgaStatus hwga_engine_step(struct HwgaEngine *engine, struct HwgaRecord *record);

/**
 * Copies the RX registers into `buf`. With a null `buf` only the
 * population size is reported through `len_out`.
 *
 * # Safety
 * `engine` must be a live engine handle; `buf` must be null or point to
 * `cap` writable `u32`s; `len_out` must be valid.
 */
enum HwgaStatus hwga_engine_population(const struct HwgaEngine *engine,
                                       uint32_t *buf,
                                       size_t cap,
                                       size_t *len_out);

/**
 * Generations completed and clock cycles elapsed so far.
 *
 * # Safety
 * `engine` must be a live engine handle; either out pointer may be null.
 */
enum HwgaStatus hwga_engine_progress(const struct HwgaEngine *engine,
                                     uint64_t *generation,
                                     uint64_t *cycles);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HWGA_H */
