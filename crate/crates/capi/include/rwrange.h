#ifndef RWRANGE_H
#define RWRANGE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible function.
 */
typedef enum RwrStatus {
  RwrStatusOk = 0,
  RwrStatusNullPointer = 1,
  RwrStatusInvalidArgument = 2,
  RwrStatusEncodeError = 3,
  RwrStatusDecodeError = 4,
} RwrStatus;

/**
 * Opaque handle to a d=2 walk range together with its step count.
 */
typedef struct RwrRange RwrRange;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *rwr_version(void);

/**
 * Simulate an n-step d=2 walk from the given seed/stream pair and return
 * its range. The caller owns the handle and must release it with
 * `rwr_range_free`.
 */
enum RwrStatus rwr_range_simulate(uint64_t n,
                                  uint64_t master_seed,
                                  uint64_t stream_id,
                                  struct RwrRange **out);

/**
 * Release a range handle. Null is a no-op.
 */
void rwr_range_free(struct RwrRange *range);

/**
 * Number of distinct visited cells.
 */
enum RwrStatus rwr_range_size(const struct RwrRange *range, uint64_t *out);

/**
 * Number of inner-boundary cells.
 */
enum RwrStatus rwr_range_boundary_size(const struct RwrRange *range, uint64_t *out);

/**
 * Walk length the range was generated (or decoded) with.
 */
enum RwrStatus rwr_range_steps(const struct RwrRange *range, uint64_t *out);

/**
 * Whether the cell (x, y) was visited.
 */
enum RwrStatus rwr_range_contains(const struct RwrRange *range, int64_t x, int64_t y, bool *out);

/**
 * Release a byte buffer returned by this library.
 */
void rwr_bytes_free(uint8_t *bytes, uintptr_t len);

/**
 * Losslessly encode the range. The buffer is owned by the caller and
 * must be released with `rwr_bytes_free`.
 */
enum RwrStatus rwr_range_encode(const struct RwrRange *range,
                                uint8_t **out_bytes,
                                uintptr_t *out_len);

/**
 * Decode an encoded range buffer into a new handle.
 */
enum RwrStatus rwr_range_decode(const uint8_t *bytes, uintptr_t len, struct RwrRange **out);

/**
 * Extract bits from the range with the default mirror templates, packed
 * MSB-first into bytes (zero padded). `out_bit_count` receives the exact
 * number of bits; the buffer must be released with `rwr_bytes_free`.
 */
enum RwrStatus rwr_range_extract_bits(const struct RwrRange *range,
                                      uint8_t **out_bytes,
                                      uintptr_t *out_byte_len,
                                      uintptr_t *out_bit_count);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RWRANGE_H */
