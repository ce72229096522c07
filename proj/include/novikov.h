/*
 * novikov — C API of the stability-zone simulator.
 *
 * The library classifies rational magnetic-field directions by the Miller
 * index of the open section orbits on a triply periodic Fermi surface,
 * aggregates stability-zone areas over a direction scan, and estimates the
 * fractal dimension of the residual unresolved direction set.
 *
 * All objects are opaque handles created and destroyed through this API.
 * Functions return NVK_OK on success; on failure nvk_last_error() gives a
 * thread-local message for the most recent failing call.
 */
#ifndef NOVIKOV_H
#define NOVIKOV_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define NVK_API __declspec(dllexport)
#else
#define NVK_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum nvk_status {
  NVK_OK = 0,
  NVK_ERR_INVALID_ARGUMENT = 1,
  NVK_ERR_PARSE = 2,
  NVK_ERR_IO = 3,
  NVK_ERR_NUMERIC = 4,
  NVK_ERR_INTERNAL = 5
} nvk_status;

typedef struct nvk_surface nvk_surface;
typedef struct nvk_scan nvk_scan;
typedef struct nvk_area_table nvk_area_table;
typedef struct nvk_dim_report nvk_dim_report;

typedef enum nvk_label_kind {
  NVK_LABEL_ZONE = 0,
  NVK_LABEL_NULL = 1,
  NVK_LABEL_UNRESOLVED = 2
} nvk_label_kind;

typedef enum nvk_unresolved_reason {
  NVK_UNRESOLVED_RANK_ONE = 0,
  NVK_UNRESOLVED_DANGLING_SEPARATRIX = 1,
  NVK_UNRESOLVED_SOLVER_FAILURE = 2,
  NVK_UNRESOLVED_DEGENERATE = 3
} nvk_unresolved_reason;

/* Every tolerance and limit of the simulation layer. Obtain defaults from
 * nvk_options_default and override selectively. */
typedef struct nvk_options {
  double tol_f;
  double tol_p;
  double tol_close;
  double rel_tol;
  double max_len_factor;
  int32_t seed_grid;
  double crit_residual;
  double dedup_tol;
  double tol_h;
  double saddle_exclusion;
  double capture_radius;
  double seed_offset;
  double eps_branch;
  int32_t levels_per_gap;
  double scanline_spacing;
  double scan_step;
  double sample_ds;
  double orbit_dedup_dist;
  double match_tol;
  int32_t max_climb_periods;
  double max_climb_arc;
  int32_t symmetric_labels;
} nvk_options;

/* One classified direction. */
typedef struct nvk_record {
  int64_t m, n, N;
  int64_t h[3];
  nvk_label_kind label_kind;
  int64_t zone[3];             /* valid when label_kind == NVK_LABEL_ZONE */
  nvk_unresolved_reason reason; /* valid when label_kind == NVK_LABEL_UNRESOLVED */
  int32_t critical_count;
  int32_t saddle_count;
  int32_t orbit_count;
  double max_residual;
  double elapsed_ms;
} nvk_record;

typedef struct nvk_area_row {
  int32_t is_null;
  int64_t label[3];
  double area;         /* flat fraction of the (m/N, n/N) triangle */
  double error;        /* boundary-cell fraction, flat measure */
  double area_sphere;  /* fraction of the full sphere (solid angle) */
  double error_sphere; /* boundary-cell fraction, sphere measure */
} nvk_area_row;

typedef void (*nvk_progress_fn)(uint64_t done, uint64_t total, void* user);

NVK_API const char* nvk_version(void);
NVK_API const char* nvk_last_error(void);
NVK_API void nvk_options_default(nvk_options* opts);

/* Surfaces: builtin name ("simple-cubic"), a surface spec file path, or
 * inline text in the same format: one term per line,
 * "cos k1,k2,k3 coeff" or "sin k1,k2,k3 coeff", '#' comments. */
NVK_API nvk_status nvk_surface_create(const char* name_or_path, nvk_surface** out);
NVK_API nvk_status nvk_surface_parse(const char* text, const char* name, nvk_surface** out);
NVK_API const char* nvk_surface_name(const nvk_surface* surface);
NVK_API nvk_status nvk_surface_eval(const nvk_surface* surface, const double x[3], double* value,
                                    double grad[3], double hess[9]);
NVK_API void nvk_surface_destroy(nvk_surface* surface);

/* Classifies direction (m, n, N); (0,0,0) is invalid. */
NVK_API nvk_status nvk_classify(const nvk_surface* surface, double energy, int64_t m, int64_t n,
                                int64_t N, const nvk_options* opts, nvk_record* out);

/* Canonical JSON form of a record, identical to a scan-file line. Writes a
 * NUL-terminated string when cap suffices; *needed always receives the
 * required buffer size including the terminator. */
NVK_API nvk_status nvk_record_to_json(const nvk_record* record, char* buf, size_t cap,
                                      size_t* needed);

/* Full scan of the (m/N, n/N, 1) grid. out_path may be NULL for an
 * in-memory scan; with resume nonzero a matching partial file is reused.
 * out may be NULL when only the file is wanted. */
NVK_API nvk_status nvk_scan_run(const nvk_surface* surface, double energy, int64_t N,
                                const nvk_options* opts, int32_t workers, const char* out_path,
                                int32_t resume, nvk_progress_fn progress, void* user,
                                nvk_scan** out);
NVK_API nvk_status nvk_scan_load(const char* path, nvk_scan** out);
NVK_API int64_t nvk_scan_record_count(const nvk_scan* scan);
NVK_API nvk_status nvk_scan_record(const nvk_scan* scan, int64_t index, nvk_record* out);
NVK_API int64_t nvk_scan_grid_n(const nvk_scan* scan);
NVK_API double nvk_scan_energy(const nvk_scan* scan);
NVK_API const char* nvk_scan_surface(const nvk_scan* scan);
NVK_API void nvk_scan_destroy(nvk_scan* scan);

/* Stability-zone area table. Rows carry both normalizations: the flat
 * parameter-triangle fraction (comparable with the published table) and
 * the solid-angle sphere fraction. */
NVK_API nvk_status nvk_scan_areas(const nvk_scan* scan, nvk_area_table** out);
NVK_API int64_t nvk_area_table_row_count(const nvk_area_table* table);
NVK_API nvk_status nvk_area_table_row(const nvk_area_table* table, int64_t index,
                                      nvk_area_row* out);
NVK_API double nvk_area_table_residual(const nvk_area_table* table);
NVK_API void nvk_area_table_destroy(nvk_area_table* table);

/* Unresolved (m/N, n/N) points, written as x0,y0,x1,y1,... Two-call
 * pattern: pass capacity 0 to query the count. */
NVK_API nvk_status nvk_scan_ergodic_points(const nvk_scan* scan, double* xy, size_t capacity,
                                           size_t* count);

/* Fractal-dimension estimators over a 2-D point set (xy pairs). Scales and
 * radii must be strictly decreasing. */
NVK_API nvk_status nvk_dimension_box_count(const double* xy, size_t n_points,
                                           const double* scales, size_t n_scales,
                                           nvk_dim_report** out);
NVK_API nvk_status nvk_dimension_sausage(const double* xy, size_t n_points, const double* radii,
                                         size_t n_radii, nvk_dim_report** out);
/* Default scale ladder for a grid of spacing 1/N; sausage nonzero selects
 * the dilation-radius ladder. */
NVK_API nvk_status nvk_default_scales(int64_t N, int32_t sausage, double* scales, size_t capacity,
                                      size_t* count);
NVK_API double nvk_dim_report_dimension(const nvk_dim_report* report);
NVK_API double nvk_dim_report_stderr(const nvk_dim_report* report);
NVK_API int64_t nvk_dim_report_scale_count(const nvk_dim_report* report);
NVK_API nvk_status nvk_dim_report_scale(const nvk_dim_report* report, int64_t index, double* scale,
                                        double* count_or_measure);
NVK_API void nvk_dim_report_destroy(nvk_dim_report* report);

/* Zone-map renders. */
NVK_API nvk_status nvk_render_svg(const nvk_scan* scan, const char* path, uint64_t palette_seed);
NVK_API nvk_status nvk_render_ppm(const nvk_scan* scan, const char* path, int32_t size,
                                  uint64_t palette_seed);

#ifdef __cplusplus
}
#endif

#endif /* NOVIKOV_H */
