#ifndef SCALP_H
#define SCALP_H

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

// Result codes.
typedef enum ScalpStatus {
  SCALP_STATUS_OK = 0,
  SCALP_STATUS_NULL_POINTER = 1,
  SCALP_STATUS_INVALID_PARAMETER = 2,
  SCALP_STATUS_DIMENSION_MISMATCH = 3,
  SCALP_STATUS_INVALID_DATA = 4,
  SCALP_STATUS_IO = 5,
  SCALP_STATUS_PANIC = 6,
} ScalpStatus;

// Path distance reuse strategy.
typedef enum ScalpPathCache {
  SCALP_PATH_CACHE_OFF = 0,
  SCALP_PATH_CACHE_EXACT = 1,
  SCALP_PATH_CACHE_APPROXIMATE = 2,
} ScalpPathCache;

// Opaque label map.
typedef struct ScalpLabels ScalpLabels;

// Decomposition parameters. Obtain defaults from [`scalp_default_options`].
typedef struct ScalpOptions {
  uint32_t k;
  double m2_scale;
  double lambda;
  double gamma;
  uint32_t n;
  double sigma;
  uint32_t iterations;
  uint64_t seed;
  // One of the [`ScalpPathCache`] values.
  uint32_t path_cache;
} ScalpOptions;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Default parameters.
struct ScalpOptions scalp_default_options(void);

// Decomposes an RGB image. `contour` may be null or point to
// `width * height` values in `[0, 1]`. On success `*out` receives a handle.
//
// # Safety
// `rgb` must hold `3 * width * height` bytes; `opts` and `out` must be valid.
enum ScalpStatus scalp_decompose_rgb(const uint8_t *rgb,
                                     uint32_t width,
                                     uint32_t height,
                                     const struct ScalpOptions *opts,
                                     const double *contour,
                                     struct ScalpLabels **out);

// Region-constrained decomposition. `ucm` holds `width * height` contour
// probabilities in `[0, 1]`; `tau` thresholds it and regions smaller than
// `t` times the mean superpixel size are merged. With `init_only`, regions
// only seed the clusters.
//
// # Safety
// As [`scalp_decompose_rgb`]; `ucm` must hold `width * height` values.
enum ScalpStatus scalp_decompose_hc_rgb(const uint8_t *rgb,
                                        uint32_t width,
                                        uint32_t height,
                                        const struct ScalpOptions *opts,
                                        const double *contour,
                                        const double *ucm,
                                        double tau,
                                        double t,
                                        bool init_only,
                                        struct ScalpLabels **out);

// Decomposes a volume with 1 or 3 channels into supervoxels. `contour`
// may be null or hold one value in `[0, 1]` per voxel.
//
// # Safety
// `data` must hold `channels * width * height * depth` values.
enum ScalpStatus scalp_decompose_volume(const double *data,
                                        uint32_t width,
                                        uint32_t height,
                                        uint32_t depth,
                                        uint32_t channels,
                                        const struct ScalpOptions *opts,
                                        const double *contour,
                                        struct ScalpLabels **out);

// Width of the label map; 0 for a null handle.
//
// # Safety
// `labels` must be null or a live handle.
uint32_t scalp_labels_width(const struct ScalpLabels *labels);

// # Safety
// `labels` must be null or a live handle.
uint32_t scalp_labels_height(const struct ScalpLabels *labels);

// 1 for planar maps.
//
// # Safety
// `labels` must be null or a live handle.
uint32_t scalp_labels_depth(const struct ScalpLabels *labels);

// Number of label entries (pixels or voxels).
//
// # Safety
// `labels` must be null or a live handle.
size_t scalp_labels_len(const struct ScalpLabels *labels);

// Number of distinct superpixels. Labels run from 0 to this count minus one.
//
// # Safety
// `labels` must be null or a live handle.
uint32_t scalp_labels_count(const struct ScalpLabels *labels);

// Borrowed pointer to the labels, valid until the handle is freed.
//
// # Safety
// `labels` must be null or a live handle.
const uint32_t *scalp_labels_data(const struct ScalpLabels *labels);

// Copies the labels into `dst`, which must have room for `len` entries
// with `len` equal to [`scalp_labels_len`].
//
// # Safety
// `dst` must be valid for `len` writes.
enum ScalpStatus scalp_labels_copy(const struct ScalpLabels *labels, uint32_t *dst, size_t len);

// Releases a handle. Null is ignored.
//
// # Safety
// `labels` must be null or a handle not freed before.
void scalp_labels_free(struct ScalpLabels *labels);

// Achievable segmentation accuracy of `s` against ground truth `t`.
// Use `depth = 1` for images.
//
// # Safety
// `s` and `t` must hold `width * height * depth` labels.
enum ScalpStatus scalp_asa(const uint32_t *s,
                           const uint32_t *t,
                           uint32_t width,
                           uint32_t height,
                           uint32_t depth,
                           double *out);

// Boundary recall of `s` against `t` with matching distance `< epsilon`.
//
// # Safety
// `s` and `t` must hold `width * height` labels.
enum ScalpStatus scalp_boundary_recall(const uint32_t *s,
                                       const uint32_t *t,
                                       uint32_t width,
                                       uint32_t height,
                                       double epsilon,
                                       double *out);

// Fraction of pixels on superpixel boundaries.
//
// # Safety
// `s` must hold `width * height` labels.
enum ScalpStatus scalp_contour_density(const uint32_t *s,
                                       uint32_t width,
                                       uint32_t height,
                                       double *out);

// Shape regularity of the superpixels of `s`.
//
// # Safety
// `s` must hold `width * height` labels.
enum ScalpStatus scalp_shape_regularity(const uint32_t *s,
                                        uint32_t width,
                                        uint32_t height,
                                        double *out);

// Copies the calling thread's last error message into `buf` (NUL
// terminated, truncated to fit) and returns the full message length
// without the terminator. Pass a null `buf` to query the length.
//
// # Safety
// `buf` must be null or valid for `len` writes.
size_t scalp_last_error_message(char *buf, size_t len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SCALP_H */
