#ifndef SKINSEG_H
#define SKINSEG_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SkinsegStatus {
  SKINSEG_STATUS_OK = 0,
  SKINSEG_STATUS_NULL_POINTER = 1,
  SKINSEG_STATUS_INVALID_UTF8 = 2,
  SKINSEG_STATUS_INVALID_ARGUMENT = 3,
  SKINSEG_STATUS_IO = 4,
  SKINSEG_STATUS_MODEL = 5,
  SKINSEG_STATUS_CONFIG = 6,
  SKINSEG_STATUS_IMAGE = 7,
  SKINSEG_STATUS_PANIC = 8,
} SkinsegStatus;

/**
 * Pipeline parameters.
 */
typedef struct SkinsegConfig SkinsegConfig;

/**
 * Trained skin cluster model.
 */
typedef struct SkinsegModel SkinsegModel;

typedef struct SkinsegMetrics {
  double precision;
  double recall;
  double f_score;
} SkinsegMetrics;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null.
 * The pointer stays valid until the next call into this library.
 */
const char *skinseg_last_error(void);

/**
 * Library version as a static string.
 */
const char *skinseg_version(void);

/**
 * Parse a model from a JSON document.
 */
enum SkinsegStatus skinseg_model_from_json(const char *json, struct SkinsegModel **out);

/**
 * Load a model from a JSON file.
 */
enum SkinsegStatus skinseg_model_load(const char *path, struct SkinsegModel **out);

/**
 * Train a model from `count` packed YCbCr triplets with default parameters.
 */
enum SkinsegStatus skinseg_model_train(const uint8_t *ycbcr,
                                       size_t count,
                                       struct SkinsegModel **out);

void skinseg_model_free(struct SkinsegModel *model);

/**
 * Serialize a model to JSON. Free the result with `skinseg_string_free`.
 */
enum SkinsegStatus skinseg_model_to_json(const struct SkinsegModel *model, char **out);

void skinseg_string_free(char *s);

/**
 * Ternary class of an RGB pixel: 2 skin, 1 uncertain, 0 non-skin.
 */
enum SkinsegStatus skinseg_model_classify_rgb(const struct SkinsegModel *model,
                                              uint8_t r,
                                              uint8_t g,
                                              uint8_t b,
                                              uint8_t *out_class);

/**
 * New configuration holding the defaults.
 */
enum SkinsegStatus skinseg_config_new(struct SkinsegConfig **out);

/**
 * Parse `key=value` lines on top of the defaults.
 */
enum SkinsegStatus skinseg_config_from_text(const char *text, struct SkinsegConfig **out);

void skinseg_config_free(struct SkinsegConfig *cfg);

/**
 * Set one dotted key. The config is left unchanged on failure.
 */
enum SkinsegStatus skinseg_config_set(struct SkinsegConfig *cfg,
                                      const char *key,
                                      const char *value);

/**
 * Segment a packed RGB buffer of `width * height * 3` bytes.
 *
 * `out_mask` receives `width * height` bytes, 1 for skin and 0 otherwise.
 * A null `cfg` selects the defaults.
 */
enum SkinsegStatus skinseg_segment_rgb(const struct SkinsegModel *model,
                                       const struct SkinsegConfig *cfg,
                                       const uint8_t *rgb,
                                       size_t width,
                                       size_t height,
                                       uint8_t *out_mask);

/**
 * Binary Otsu threshold of a 256-bin histogram.
 */
enum SkinsegStatus skinseg_otsu_threshold(const uint64_t *histogram, uint8_t *out_threshold);

bool skinseg_kovac_daylight(uint8_t r, uint8_t g, uint8_t b);

bool skinseg_kovac_flashlight(uint8_t r, uint8_t g, uint8_t b);

/**
 * Precision, recall and F-score of a confusion count.
 */
struct SkinsegMetrics skinseg_metrics(uint64_t tp, uint64_t fp, uint64_t tn, uint64_t fn_);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SKINSEG_H */
