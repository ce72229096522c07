#include "novikov.h"

#include <cstring>
#include <string>

#include "novikov/areas.hpp"
#include "novikov/classify.hpp"
#include "novikov/dimension.hpp"
#include "novikov/errors.hpp"
#include "novikov/jsonl.hpp"
#include "novikov/render.hpp"
#include "novikov/scan.hpp"

using namespace novikov;

struct nvk_surface {
  DispersionRelation f;
};
struct nvk_scan {
  ScanResult scan;
};
struct nvk_area_table {
  AreaTable table;
};
struct nvk_dim_report {
  BoxCountReport report;
};

namespace {

thread_local std::string g_last_error;

template <typename Fn>
nvk_status guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const ParseError& e) {
    g_last_error = e.what();
    return NVK_ERR_PARSE;
  } catch (const PreconditionViolation& e) {
    g_last_error = e.what();
    return NVK_ERR_INVALID_ARGUMENT;
  } catch (const DegenerateInput& e) {
    g_last_error = e.what();
    return NVK_ERR_INVALID_ARGUMENT;
  } catch (const Error& e) {
    g_last_error = e.what();
    return NVK_ERR_NUMERIC;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return NVK_ERR_INTERNAL;
  }
}

nvk_status invalid(const char* message) {
  g_last_error = message;
  return NVK_ERR_INVALID_ARGUMENT;
}

SimOptions to_cpp(const nvk_options& o) {
  SimOptions s;
  s.tol_f = o.tol_f;
  s.tol_p = o.tol_p;
  s.tol_close = o.tol_close;
  s.rel_tol = o.rel_tol;
  s.max_len_factor = o.max_len_factor;
  s.seed_grid = o.seed_grid;
  s.crit_residual = o.crit_residual;
  s.dedup_tol = o.dedup_tol;
  s.tol_h = o.tol_h;
  s.saddle_exclusion = o.saddle_exclusion;
  s.capture_radius = o.capture_radius;
  s.seed_offset = o.seed_offset;
  s.eps_branch = o.eps_branch;
  s.levels_per_gap = o.levels_per_gap;
  s.scanline_spacing = o.scanline_spacing;
  s.scan_step = o.scan_step;
  s.sample_ds = o.sample_ds;
  s.orbit_dedup_dist = o.orbit_dedup_dist;
  s.match_tol = o.match_tol;
  s.max_climb_periods = o.max_climb_periods;
  s.max_climb_arc = o.max_climb_arc;
  s.symmetric_labels = o.symmetric_labels != 0;
  return s;
}

nvk_options to_c(const SimOptions& s) {
  nvk_options o;
  o.tol_f = s.tol_f;
  o.tol_p = s.tol_p;
  o.tol_close = s.tol_close;
  o.rel_tol = s.rel_tol;
  o.max_len_factor = s.max_len_factor;
  o.seed_grid = s.seed_grid;
  o.crit_residual = s.crit_residual;
  o.dedup_tol = s.dedup_tol;
  o.tol_h = s.tol_h;
  o.saddle_exclusion = s.saddle_exclusion;
  o.capture_radius = s.capture_radius;
  o.seed_offset = s.seed_offset;
  o.eps_branch = s.eps_branch;
  o.levels_per_gap = s.levels_per_gap;
  o.scanline_spacing = s.scanline_spacing;
  o.scan_step = s.scan_step;
  o.sample_ds = s.sample_ds;
  o.orbit_dedup_dist = s.orbit_dedup_dist;
  o.match_tol = s.match_tol;
  o.max_climb_periods = s.max_climb_periods;
  o.max_climb_arc = s.max_climb_arc;
  o.symmetric_labels = s.symmetric_labels ? 1 : 0;
  return o;
}

nvk_record to_c(const DirectionRecord& r) {
  nvk_record c{};
  c.m = r.m;
  c.n = r.n;
  c.N = r.N;
  c.h[0] = r.h.x;
  c.h[1] = r.h.y;
  c.h[2] = r.h.z;
  switch (r.label.kind) {
    case ZoneLabel::Kind::Zone:
      c.label_kind = NVK_LABEL_ZONE;
      c.zone[0] = r.label.zone.x;
      c.zone[1] = r.label.zone.y;
      c.zone[2] = r.label.zone.z;
      break;
    case ZoneLabel::Kind::Null:
      c.label_kind = NVK_LABEL_NULL;
      break;
    case ZoneLabel::Kind::Unresolved:
      c.label_kind = NVK_LABEL_UNRESOLVED;
      switch (r.label.reason) {
        case UnresolvedReason::RankOne: c.reason = NVK_UNRESOLVED_RANK_ONE; break;
        case UnresolvedReason::DanglingSeparatrix:
          c.reason = NVK_UNRESOLVED_DANGLING_SEPARATRIX;
          break;
        case UnresolvedReason::SolverFailure: c.reason = NVK_UNRESOLVED_SOLVER_FAILURE; break;
        case UnresolvedReason::Degenerate: c.reason = NVK_UNRESOLVED_DEGENERATE; break;
      }
      break;
  }
  c.critical_count = r.diag.critical_count;
  c.saddle_count = r.diag.saddle_count;
  c.orbit_count = r.diag.orbit_count;
  c.max_residual = r.diag.max_residual;
  c.elapsed_ms = r.diag.elapsed_ms;
  return c;
}

DirectionRecord to_cpp(const nvk_record& c) {
  DirectionRecord r;
  r.m = c.m;
  r.n = c.n;
  r.N = c.N;
  r.h = {c.h[0], c.h[1], c.h[2]};
  switch (c.label_kind) {
    case NVK_LABEL_ZONE:
      r.label = ZoneLabel::make_zone({c.zone[0], c.zone[1], c.zone[2]});
      break;
    case NVK_LABEL_NULL:
      r.label = ZoneLabel::make_null();
      break;
    case NVK_LABEL_UNRESOLVED: {
      UnresolvedReason reason = UnresolvedReason::SolverFailure;
      switch (c.reason) {
        case NVK_UNRESOLVED_RANK_ONE: reason = UnresolvedReason::RankOne; break;
        case NVK_UNRESOLVED_DANGLING_SEPARATRIX:
          reason = UnresolvedReason::DanglingSeparatrix;
          break;
        case NVK_UNRESOLVED_SOLVER_FAILURE: reason = UnresolvedReason::SolverFailure; break;
        case NVK_UNRESOLVED_DEGENERATE: reason = UnresolvedReason::Degenerate; break;
      }
      r.label = ZoneLabel::make_unresolved(reason);
      break;
    }
  }
  r.diag.critical_count = c.critical_count;
  r.diag.saddle_count = c.saddle_count;
  r.diag.orbit_count = c.orbit_count;
  r.diag.max_residual = c.max_residual;
  r.diag.elapsed_ms = c.elapsed_ms;
  return r;
}

}  // namespace

extern "C" {

const char* nvk_version(void) { return kToolVersion; }

const char* nvk_last_error(void) { return g_last_error.c_str(); }

void nvk_options_default(nvk_options* opts) {
  if (opts) *opts = to_c(SimOptions{});
}

nvk_status nvk_surface_create(const char* name_or_path, nvk_surface** out) {
  if (!name_or_path || !out) return invalid("nvk_surface_create: null argument");
  return guarded([&] {
    *out = new nvk_surface{DispersionRelation::resolve(name_or_path)};
    return NVK_OK;
  });
}

nvk_status nvk_surface_parse(const char* text, const char* name, nvk_surface** out) {
  if (!text || !out) return invalid("nvk_surface_parse: null argument");
  return guarded([&] {
    *out = new nvk_surface{DispersionRelation::parse(text, name ? name : "custom")};
    return NVK_OK;
  });
}

const char* nvk_surface_name(const nvk_surface* surface) {
  return surface ? surface->f.name().c_str() : "";
}

nvk_status nvk_surface_eval(const nvk_surface* surface, const double x[3], double* value,
                            double grad[3], double hess[9]) {
  if (!surface || !x) return invalid("nvk_surface_eval: null argument");
  return guarded([&] {
    const Jet jet = evaluate_jet(surface->f, Vec3{x[0], x[1], x[2]});
    if (value) *value = jet.value;
    if (grad)
      for (int i = 0; i < 3; ++i) grad[i] = jet.gradient[i];
    if (hess)
      for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) hess[r * 3 + c] = jet.hessian(r, c);
    return NVK_OK;
  });
}

void nvk_surface_destroy(nvk_surface* surface) { delete surface; }

nvk_status nvk_classify(const nvk_surface* surface, double energy, int64_t m, int64_t n,
                        int64_t N, const nvk_options* opts, nvk_record* out) {
  if (!surface || !out) return invalid("nvk_classify: null argument");
  if (m == 0 && n == 0 && N == 0) return invalid("nvk_classify: direction (0,0,0)");
  return guarded([&] {
    SimOptions sim = opts ? to_cpp(*opts) : SimOptions{};
    const Direction dir = Direction::from_integer({m, n, N});
    DirectionRecord rec = classify_direction(surface->f, energy, dir, sim);
    rec.m = m;
    rec.n = n;
    rec.N = N;
    *out = to_c(rec);
    return NVK_OK;
  });
}

nvk_status nvk_record_to_json(const nvk_record* record, char* buf, size_t cap, size_t* needed) {
  if (!record || !needed) return invalid("nvk_record_to_json: null argument");
  return guarded([&] {
    const std::string line = record_line(to_cpp(*record));
    *needed = line.size() + 1;
    if (buf && cap >= line.size() + 1) std::memcpy(buf, line.c_str(), line.size() + 1);
    return NVK_OK;
  });
}

nvk_status nvk_scan_run(const nvk_surface* surface, double energy, int64_t N,
                        const nvk_options* opts, int32_t workers, const char* out_path,
                        int32_t resume, nvk_progress_fn progress, void* user, nvk_scan** out) {
  if (!surface) return invalid("nvk_scan_run: null surface");
  if (N < 1) return invalid("nvk_scan_run: N must be >= 1");
  if (workers < 1) return invalid("nvk_scan_run: workers must be >= 1");
  return guarded([&] {
    SimOptions sim = opts ? to_cpp(*opts) : SimOptions{};
    ProgressFn cb;
    if (progress)
      cb = [progress, user](std::uint64_t done, std::uint64_t total) {
        progress(done, total, user);
      };
    ScanResult scan_result = scan(surface->f, energy, N, sim, workers,
                                  out_path ? out_path : "", resume != 0, cb);
    if (out) *out = new nvk_scan{std::move(scan_result)};
    return NVK_OK;
  });
}

nvk_status nvk_scan_load(const char* path, nvk_scan** out) {
  if (!path || !out) return invalid("nvk_scan_load: null argument");
  return guarded([&] {
    *out = new nvk_scan{read_scan_file(path)};
    return NVK_OK;
  });
}

int64_t nvk_scan_record_count(const nvk_scan* scan) {
  return scan ? static_cast<int64_t>(scan->scan.records.size()) : 0;
}

nvk_status nvk_scan_record(const nvk_scan* scan, int64_t index, nvk_record* out) {
  if (!scan || !out) return invalid("nvk_scan_record: null argument");
  if (index < 0 || index >= static_cast<int64_t>(scan->scan.records.size()))
    return invalid("nvk_scan_record: index out of range");
  *out = to_c(scan->scan.records[static_cast<std::size_t>(index)]);
  return NVK_OK;
}

int64_t nvk_scan_grid_n(const nvk_scan* scan) { return scan ? scan->scan.header.N : 0; }

double nvk_scan_energy(const nvk_scan* scan) { return scan ? scan->scan.header.energy : 0.0; }

const char* nvk_scan_surface(const nvk_scan* scan) {
  return scan ? scan->scan.header.surface.c_str() : "";
}

void nvk_scan_destroy(nvk_scan* scan) { delete scan; }

nvk_status nvk_scan_areas(const nvk_scan* scan, nvk_area_table** out) {
  if (!scan || !out) return invalid("nvk_scan_areas: null argument");
  return guarded([&] {
    *out = new nvk_area_table{zone_areas(scan->scan)};
    return NVK_OK;
  });
}

int64_t nvk_area_table_row_count(const nvk_area_table* table) {
  return table ? static_cast<int64_t>(table->table.rows.size()) : 0;
}

nvk_status nvk_area_table_row(const nvk_area_table* table, int64_t index, nvk_area_row* out) {
  if (!table || !out) return invalid("nvk_area_table_row: null argument");
  if (index < 0 || index >= static_cast<int64_t>(table->table.rows.size()))
    return invalid("nvk_area_table_row: index out of range");
  const AreaRow& row = table->table.rows[static_cast<std::size_t>(index)];
  out->is_null = row.is_null ? 1 : 0;
  out->label[0] = row.label.x;
  out->label[1] = row.label.y;
  out->label[2] = row.label.z;
  out->area = row.area;
  out->error = row.error;
  out->area_sphere = row.area_sphere;
  out->error_sphere = row.error_sphere;
  return NVK_OK;
}

double nvk_area_table_residual(const nvk_area_table* table) {
  return table ? table->table.residual_area : 0.0;
}

void nvk_area_table_destroy(nvk_area_table* table) { delete table; }

nvk_status nvk_scan_ergodic_points(const nvk_scan* scan, double* xy, size_t capacity,
                                   size_t* count) {
  if (!scan || !count) return invalid("nvk_scan_ergodic_points: null argument");
  return guarded([&] {
    const auto points = extract_ergodic_set(scan->scan);
    *count = points.size();
    if (xy && capacity >= points.size()) {
      for (std::size_t i = 0; i < points.size(); ++i) {
        xy[2 * i] = points[i][0];
        xy[2 * i + 1] = points[i][1];
      }
    }
    return NVK_OK;
  });
}

namespace {

nvk_status run_dimension(const double* xy, size_t n_points, const double* scales, size_t n_scales,
                         bool sausage, nvk_dim_report** out) {
  if (!xy || !scales || !out) return invalid("dimension: null argument");
  return guarded([&] {
    std::vector<std::array<double, 2>> pts(n_points);
    for (size_t i = 0; i < n_points; ++i) pts[i] = {xy[2 * i], xy[2 * i + 1]};
    std::vector<double> sc(scales, scales + n_scales);
    BoxCountReport report =
        sausage ? sausage_dimension(pts, sc) : box_count_dimension(pts, sc);
    *out = new nvk_dim_report{std::move(report)};
    return NVK_OK;
  });
}

}  // namespace

nvk_status nvk_dimension_box_count(const double* xy, size_t n_points, const double* scales,
                                   size_t n_scales, nvk_dim_report** out) {
  return run_dimension(xy, n_points, scales, n_scales, false, out);
}

nvk_status nvk_dimension_sausage(const double* xy, size_t n_points, const double* radii,
                                 size_t n_radii, nvk_dim_report** out) {
  return run_dimension(xy, n_points, radii, n_radii, true, out);
}

nvk_status nvk_default_scales(int64_t N, int32_t sausage, double* scales, size_t capacity,
                              size_t* count) {
  if (!count) return invalid("nvk_default_scales: null count");
  return guarded([&] {
    const auto v = sausage ? default_sausage_radii(N) : default_box_scales(N);
    *count = v.size();
    if (scales && capacity >= v.size())
      for (std::size_t i = 0; i < v.size(); ++i) scales[i] = v[i];
    return NVK_OK;
  });
}

double nvk_dim_report_dimension(const nvk_dim_report* report) {
  return report ? report->report.dimension : 0.0;
}

double nvk_dim_report_stderr(const nvk_dim_report* report) {
  return report ? report->report.fit_stderr : 0.0;
}

int64_t nvk_dim_report_scale_count(const nvk_dim_report* report) {
  return report ? static_cast<int64_t>(report->report.scales.size()) : 0;
}

nvk_status nvk_dim_report_scale(const nvk_dim_report* report, int64_t index, double* scale,
                                double* count_or_measure) {
  if (!report) return invalid("nvk_dim_report_scale: null report");
  if (index < 0 || index >= static_cast<int64_t>(report->report.scales.size()))
    return invalid("nvk_dim_report_scale: index out of range");
  if (scale) *scale = report->report.scales[static_cast<std::size_t>(index)];
  if (count_or_measure)
    *count_or_measure = report->report.counts_or_measures[static_cast<std::size_t>(index)];
  return NVK_OK;
}

void nvk_dim_report_destroy(nvk_dim_report* report) { delete report; }

nvk_status nvk_render_svg(const nvk_scan* scan, const char* path, uint64_t palette_seed) {
  if (!scan || !path) return invalid("nvk_render_svg: null argument");
  return guarded([&] {
    render_svg(scan->scan, path, palette_seed);
    return NVK_OK;
  });
}

nvk_status nvk_render_ppm(const nvk_scan* scan, const char* path, int32_t size,
                          uint64_t palette_seed) {
  if (!scan || !path) return invalid("nvk_render_ppm: null argument");
  if (size < 16) return invalid("nvk_render_ppm: size too small");
  return guarded([&] {
    render_ppm(scan->scan, path, size, palette_seed);
    return NVK_OK;
  });
}

}  // extern "C"
