#ifndef CBIOU_H
#define CBIOU_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define CBIOU_SIM_IOU 0

#define CBIOU_SIM_GIOU 1

#define CBIOU_SIM_DIOU 2

#define CBIOU_SIM_BIOU 3

typedef enum CbiouStatus {
  CBIOU_STATUS_OK = 0,
  CBIOU_STATUS_NULL_POINTER = 1,
  CBIOU_STATUS_INVALID_ARGUMENT = 2,
  CBIOU_STATUS_DATA_ERROR = 3,
  CBIOU_STATUS_IO_ERROR = 4,
  CBIOU_STATUS_BUFFER_TOO_SMALL = 5,
  CBIOU_STATUS_PANIC = 6,
} CbiouStatus;

/**
 * Opaque tracker handle.
 */
typedef struct CbiouTracker CbiouTracker;

typedef struct CbiouConfig {
  double b1;
  double b2;
  uint32_t max_age;
  uint32_t n_max;
  double min_sim;
  double det_conf_min;
  /**
   * One of the `CBIOU_SIM_*` constants.
   */
  uint32_t similarity;
  bool cascade_enabled;
  bool motion_enabled;
} CbiouConfig;

/**
 * Axis-aligned box as top-left corner plus width and height.
 */
typedef struct CbiouBox {
  double x;
  double y;
  double w;
  double h;
} CbiouBox;

typedef struct CbiouDetection {
  struct CbiouBox bbox;
  double confidence;
} CbiouDetection;

typedef struct CbiouRecord {
  uint64_t id;
  struct CbiouBox bbox;
  double confidence;
} CbiouRecord;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * The library's default configuration.
 */
struct CbiouConfig cbiou_config_default(void);

/**
 * Create a tracker. `config` may be null for the defaults. On success
 * `*out` owns a handle to release with [`cbiou_tracker_free`].
 */
enum CbiouStatus cbiou_tracker_new(const struct CbiouConfig *config, struct CbiouTracker **out);

/**
 * Release a tracker. Null is ignored.
 */
void cbiou_tracker_free(struct CbiouTracker *tracker);

/**
 * Advance to `frame` with `count` detections.
 *
 * `records` must hold at least `count` entries; nothing is consumed when it
 * does not. The number written is stored in `*written`, ordered by id.
 */
enum CbiouStatus cbiou_tracker_step(struct CbiouTracker *tracker,
                                    uint32_t frame,
                                    const struct CbiouDetection *detections,
                                    size_t count,
                                    struct CbiouRecord *records,
                                    size_t capacity,
                                    size_t *written);

/**
 * Number of live tracks, or 0 for a null handle.
 */
size_t cbiou_tracker_track_count(const struct CbiouTracker *tracker);

enum CbiouStatus cbiou_iou(const struct CbiouBox *a, const struct CbiouBox *b, double *out);

enum CbiouStatus cbiou_giou(const struct CbiouBox *a, const struct CbiouBox *b, double *out);

enum CbiouStatus cbiou_diou(const struct CbiouBox *a, const struct CbiouBox *b, double *out);

/**
 * IoU of both boxes after expanding each by `scale` times its own size
 * on every side.
 */
enum CbiouStatus cbiou_biou(const struct CbiouBox *a,
                            const struct CbiouBox *b,
                            double scale,
                            double *out);

/**
 * Message for the last failed call on this thread, or null. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *cbiou_last_error_message(void);

/**
 * Library version as a static nul-terminated string.
 */
const char *cbiou_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CBIOU_H */
