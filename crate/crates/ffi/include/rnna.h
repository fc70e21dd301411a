#ifndef RNNA_H
#define RNNA_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum {
  RNNA_STATUS_OK = 0,
  RNNA_STATUS_NULL_POINTER = 1,
  RNNA_STATUS_INVALID_ARGUMENT = 2,
  RNNA_STATUS_LENGTH_MISMATCH = 3,
  RNNA_STATUS_INFEASIBLE = 4,
  RNNA_STATUS_IO = 5,
  RNNA_STATUS_FORMAT = 6,
  RNNA_STATUS_DIVERGED = 7,
  RNNA_STATUS_PANIC = 8,
} RnnaStatus;

/**
 * Channel parameters at a fixed (N_PE, T).
 */
typedef struct RnnaChannel RnnaChannel;

/**
 * LDPC code with its systematic encoder.
 */
typedef struct RnnaCode RnnaCode;

/**
 * Trained GRU detector.
 */
typedef struct RnnaDetector RnnaDetector;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread. Valid until the next
 * failing call on the same thread; never NULL.
 */
const char *rnna_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *rnna_version(void);

/**
 * Default MLC channel at (`n_pe`, `t_ret` hours).
 *
 * # Safety
 * `out` must be valid for one pointer write.
 */
RnnaStatus rnna_channel_new(uint64_t n_pe, double t_ret, RnnaChannel **out);

/**
 * Channel from a TOML document (same schema as the CLI channel presets).
 *
 * # Safety
 * `toml` must be a NUL-terminated string; `out` valid for one write.
 */
RnnaStatus rnna_channel_from_toml(const char *toml, RnnaChannel **out);

/**
 * # Safety
 * `ch` must be NULL or a handle from this library, not yet freed.
 */
void rnna_channel_free(RnnaChannel *ch);

/**
 * Per-state means and standard deviations (states s11, s10, s00, s01).
 *
 * # Safety
 * `mu` and `sigma` must each hold 4 doubles.
 */
RnnaStatus rnna_channel_moments(const RnnaChannel *ch, double *mu, double *sigma);

/**
 * Draws one voltage per symbol (symbols in 0..4, Gray order s11..s01).
 *
 * # Safety
 * `symbols` holds `len` bytes and `voltages` room for `len` doubles.
 */
RnnaStatus rnna_channel_sample(const RnnaChannel *ch,
                               const uint8_t *symbols,
                               size_t len,
                               uint64_t seed,
                               double *voltages);

/**
 * Hard thresholds minimizing the symbol error probability, and that SEP.
 *
 * # Safety
 * `thresholds` must hold 3 doubles; `sep` may be NULL.
 */
RnnaStatus rnna_optimum_thresholds(const RnnaChannel *ch, double *thresholds, double *sep);

/**
 * Mutual information (bits) of the quantizer with `len` increasing
 * boundaries on this channel.
 *
 * # Safety
 * `boundaries` holds `len` doubles; `out` valid for one write.
 */
RnnaStatus rnna_mutual_information(const RnnaChannel *ch,
                                   const double *boundaries,
                                   size_t len,
                                   double *out);

/**
 * Error fraction after each of `iterations` density-evolution rounds for
 * the regular (`d_v`, `d_c`) ensemble, with the channel quantized by the
 * soft regions `widths` around `hard`.
 *
 * # Safety
 * `hard` and `widths` hold 3 doubles; `trace` room for `iterations`.
 */
RnnaStatus rnna_dde_run(const RnnaChannel *ch,
                        const double *hard,
                        const double *widths,
                        size_t d_v,
                        size_t d_c,
                        double alpha,
                        size_t iterations,
                        double *trace);

/**
 * DP thresholds maximizing agreement with `decisions` over a uniform grid
 * of `m` cells on [`lo`, `hi`].
 *
 * # Safety
 * `voltages` and `decisions` hold `len` items; `thresholds` 3 doubles;
 * `objective` may be NULL.
 */
RnnaStatus rnna_dp_thresholds(const double *voltages,
                              const uint8_t *decisions,
                              size_t len,
                              double lo,
                              double hi,
                              size_t m,
                              double *thresholds,
                              uint64_t *objective);

/**
 * Six soft boundaries from 3 hard thresholds and 3 region widths.
 *
 * # Safety
 * `hard`, `widths` hold 3 doubles; `boundaries` room for 6.
 */
RnnaStatus rnna_soft_boundaries(const double *hard, const double *widths, double *boundaries);

/**
 * Integer MSB/LSB reliabilities per voltage; `llrs[2k]` is the MSB and
 * `llrs[2k + 1]` the LSB of cell `k`.
 *
 * # Safety
 * `boundaries` holds 6 increasing doubles, `voltages` `len` doubles and
 * `llrs` room for `2 * len` bytes.
 */
RnnaStatus rnna_integer_llrs(const double *boundaries,
                             const double *voltages,
                             size_t len,
                             int8_t *llrs);

/**
 * Loads a detector saved by `rnna train-detector`.
 *
 * # Safety
 * `path` must be NUL-terminated; `out` valid for one write.
 */
RnnaStatus rnna_detector_load(const char *path, RnnaDetector **out);

/**
 * # Safety
 * `det` must be NULL or a handle from this library, not yet freed.
 */
void rnna_detector_free(RnnaDetector *det);

/**
 * Soft symbol estimates, and optionally hardened symbols.
 *
 * # Safety
 * `voltages` holds `len` doubles, `soft` room for `len` doubles; `hard`
 * is NULL or has room for `len` bytes.
 */
RnnaStatus rnna_detector_detect(const RnnaDetector *det,
                                const double *voltages,
                                size_t len,
                                double *soft,
                                uint8_t *hard);

/**
 * Regular (`d_v`, `d_c`) PEG code of length `n`, deterministic in `seed`.
 *
 * # Safety
 * `out` valid for one write.
 */
RnnaStatus rnna_code_peg(size_t n, size_t d_v, size_t d_c, uint64_t seed, RnnaCode **out);

/**
 * # Safety
 * `code` must be NULL or a handle from this library, not yet freed.
 */
void rnna_code_free(RnnaCode *code);

/**
 * Code length, information length and number of checks. Any output may
 * be NULL.
 *
 * # Safety
 * `code` must be a live handle.
 */
RnnaStatus rnna_code_dims(const RnnaCode *code, size_t *n, size_t *k, size_t *m);

/**
 * Systematic encoding of `k` information bits into `n` code bits.
 *
 * # Safety
 * `info` holds `k` bytes (0/1), `codeword` room for `n` bytes.
 */
RnnaStatus rnna_code_encode(const RnnaCode *code,
                            const uint8_t *info,
                            size_t k,
                            uint8_t *codeword,
                            size_t n);

/**
 * Normalized min-sum decoding (positive LLR means bit 0).
 *
 * # Safety
 * `llrs` holds `n` doubles, `bits` room for `n` bytes; `iterations` and
 * `converged` may be NULL.
 */
RnnaStatus rnna_code_decode(const RnnaCode *code,
                            const double *llrs,
                            size_t n,
                            double alpha,
                            size_t max_iterations,
                            uint8_t *bits,
                            size_t *iterations,
                            bool *converged);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RNNA_H */
