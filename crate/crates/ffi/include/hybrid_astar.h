#ifndef HYBRID_ASTAR_H
#define HYBRID_ASTAR_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum HaStatus {
  HA_STATUS_OK = 0,
  HA_STATUS_NULL_POINTER = 1,
  HA_STATUS_INVALID_ARGUMENT = 2,
  HA_STATUS_IO = 3,
  HA_STATUS_PARSE = 4,
  HA_STATUS_NO_PATH = 5,
  HA_STATUS_BUDGET_EXCEEDED = 6,
  HA_STATUS_START_IN_COLLISION = 7,
  HA_STATUS_GOAL_IN_COLLISION = 8,
  HA_STATUS_INTERNAL = 9,
} HaStatus;

/**
 * Cell values accepted by the grid functions.
 */
typedef enum HaCell {
  HA_CELL_FREE = 0,
  HA_CELL_OCCUPIED = 1,
  HA_CELL_UNKNOWN = 2,
} HaCell;

/**
 * Planner modes accepted by [`ha_plan`].
 */
typedef enum HaMode {
  HA_MODE_STANDARD = 0,
  HA_MODE_EXTENDED = 1,
} HaMode;

/**
 * Occupancy grid handle.
 */
typedef struct HaGrid HaGrid;

/**
 * Planned path handle.
 */
typedef struct HaPath HaPath;

typedef struct HaPose {
  double x;
  double y;
  double yaw;
} HaPose;

typedef struct HaMetrics {
  double kappa_dot_rms;
  double kappa_dot_max_abs;
  double p_max;
  double p_avg;
  double length;
  double t_max;
  double t_cum;
  double t_avg;
  size_t n_planner_calls;
  size_t cumulative_nodes;
  size_t n_direction_switches;
  size_t n_rotations;
  bool reached;
} HaMetrics;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null. Valid until the
 * next failing call on the same thread.
 */
const char *ha_last_error(void);

/**
 * Creates a grid filled with `fill` (an [`HaCell`] value).
 *
 * # Safety
 * `out` must be null or valid for writes.
 */
enum HaStatus ha_grid_new(size_t width,
                          size_t height,
                          double resolution,
                          uint32_t fill,
                          struct HaGrid **out);

/**
 * Reads a map file.
 *
 * # Safety
 * `path` must be null or a NUL-terminated string; `out` must be null or
 * valid for writes.
 */
enum HaStatus ha_grid_load(const char *path, struct HaGrid **out);

/**
 * # Safety
 * `grid` must be null or a live handle from this library.
 */
enum HaStatus ha_grid_set(struct HaGrid *grid, size_t ix, size_t iy, uint32_t cell);

/**
 * # Safety
 * `grid` must be null or a live handle; `out` must be null or valid for
 * writes.
 */
enum HaStatus ha_grid_get(const struct HaGrid *grid, size_t ix, size_t iy, uint32_t *out);

/**
 * Fills the axis-aligned rectangle (world meters) with `cell`.
 *
 * # Safety
 * `grid` must be null or a live handle.
 */
enum HaStatus ha_grid_fill_rect(struct HaGrid *grid,
                                double x0,
                                double y0,
                                double x1,
                                double y1,
                                uint32_t cell);

/**
 * # Safety
 * `grid` must be null or a handle not yet freed.
 */
void ha_grid_free(struct HaGrid *grid);

/**
 * Plans from `start` to `goal` with the default planner settings and the
 * U-Shift vehicle. `mode` is an [`HaMode`] value.
 *
 * # Safety
 * `grid` must be null or a live handle; `out` must be null or valid for
 * writes.
 */
enum HaStatus ha_plan(const struct HaGrid *grid,
                      struct HaPose start,
                      struct HaPose goal,
                      uint32_t mode,
                      struct HaPath **out);

/**
 * # Safety
 * `path` must be null or a live handle; `out` must be null or valid for
 * writes.
 */
enum HaStatus ha_path_length(const struct HaPath *path, double *out);

/**
 * Number of poses along the path, 0 for a null handle.
 *
 * # Safety
 * `path` must be null or a live handle.
 */
size_t ha_path_pose_count(const struct HaPath *path);

/**
 * # Safety
 * `path` must be null or a live handle; `out` must be null or valid for
 * writes.
 */
enum HaStatus ha_path_pose(const struct HaPath *path, size_t index, struct HaPose *out);

/**
 * # Safety
 * `path` must be null or a live handle.
 */
size_t ha_path_rotation_count(const struct HaPath *path);

/**
 * # Safety
 * `path` must be null or a live handle.
 */
size_t ha_path_direction_switches(const struct HaPath *path);

/**
 * The path in the `path.json` layout. Release with [`ha_string_free`].
 *
 * # Safety
 * `path` must be null or a live handle; `out` must be null or valid for
 * writes.
 */
enum HaStatus ha_path_to_json(const struct HaPath *path, char **out);

/**
 * # Safety
 * `path` must be null or a handle not yet freed.
 */
void ha_path_free(struct HaPath *path);

/**
 * # Safety
 * `s` must be null or a string returned by this library and not yet freed.
 */
void ha_string_free(char *s);

/**
 * Runs a JSON run config like `plan run` and writes the same output files.
 * Returns `HA_STATUS_OK` whenever the run completes; `metrics.reached` tells
 * whether the goal was reached.
 *
 * # Safety
 * `config_path` must be null or a NUL-terminated string; `metrics` must be
 * null or valid for writes.
 */
enum HaStatus ha_run_config(const char *config_path, bool no_timing, struct HaMetrics *metrics);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HYBRID_ASTAR_H */
