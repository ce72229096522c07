// novikov — stability zones of semiclassical electron orbits.
//
// Subcommands: classify, scan, report (areas | fracdim), render.
// The CLI drives the simulator exclusively through the C API in novikov.h.

#include <chrono>
#include <cinttypes>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "novikov.h"

namespace {

struct OptionOverrides {
  nvk_options opts;
  OptionOverrides() { nvk_options_default(&opts); }
};

void add_tolerance_flags(CLI::App* cmd, OptionOverrides& ov) {
  cmd->add_option("--tol-close", ov.opts.tol_close, "orbit closure tolerance (turns)");
  cmd->add_option("--rel-tol", ov.opts.rel_tol, "integrator relative tolerance");
  cmd->add_option("--seed-grid", ov.opts.seed_grid, "critical-point seed grid per axis");
  cmd->add_option("--levels-per-gap", ov.opts.levels_per_gap,
                  "regular planes per critical-height gap");
  cmd->add_option("--capture-radius", ov.opts.capture_radius, "saddle capture radius");
  cmd->add_option("--seed-offset", ov.opts.seed_offset, "separatrix seed offset");
  cmd->add_option("--eps-branch", ov.opts.eps_branch, "degenerate branch-detection radius");
  cmd->add_option("--max-len-factor", ov.opts.max_len_factor,
                  "orbit arc budget, in units of |h|*2pi");
  cmd->add_option("--max-climb-periods", ov.opts.max_climb_periods,
                  "height periods to climb when resolving rank-1 lattices");
  cmd->add_option("--scan-step", ov.opts.scan_step, "seed scanline sampling step");
  cmd->add_flag("--non-symmetric-labels{false}", ov.opts.symmetric_labels,
                "disable the 48-fold canonical label symmetry")
      ->default_val(ov.opts.symmetric_labels);
}

bool parse_dir(const std::string& text, int64_t& m, int64_t& n, int64_t& N) {
  std::istringstream is(text);
  char c1 = 0, c2 = 0;
  if (!(is >> m >> c1 >> n >> c2 >> N) || c1 != ',' || c2 != ',') return false;
  std::string rest;
  if (is >> rest) return false;
  return true;
}

int fail(const std::string& message) {
  std::fprintf(stderr, "error: %s\n", message.c_str());
  return 1;
}

int fail_api(const std::string& what) {
  std::fprintf(stderr, "error: %s: %s\n", what.c_str(), nvk_last_error());
  return 1;
}

std::string label_csv(const nvk_area_row& row) {
  if (row.is_null) return "null";
  char buf[80];
  std::snprintf(buf, sizeof buf, "%" PRId64 ",%" PRId64 ",%" PRId64, row.label[0], row.label[1],
                row.label[2]);
  return buf;
}

struct ProgressState {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  std::chrono::steady_clock::time_point last_print = std::chrono::steady_clock::now();
  uint64_t last_done = 0;
};

void progress_cb(uint64_t done, uint64_t total, void* user) {
  auto* st = static_cast<ProgressState*>(user);
  const auto now = std::chrono::steady_clock::now();
  const double since = std::chrono::duration<double>(now - st->last_print).count();
  if (since >= 1.0 || done == total) {
    const double rate = since > 0 ? static_cast<double>(done - st->last_done) / since : 0.0;
    const double elapsed = std::chrono::duration<double>(now - st->start).count();
    std::fprintf(stderr, "scan: %" PRIu64 "/%" PRIu64 " directions (%.1f dir/s, %.0fs)\n", done,
                 total, rate, elapsed);
    st->last_print = now;
    st->last_done = done;
  }
}

int default_workers() {
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

int cmd_classify(const std::string& dir_text, const std::string& surface, double energy,
                 const OptionOverrides& ov) {
  int64_t m, n, N;
  if (!parse_dir(dir_text, m, n, N)) return fail("--dir expects m,n,N");
  if (m == 0 && n == 0 && N == 0) return fail("direction (0,0,0) is invalid");
  nvk_surface* surf = nullptr;
  if (nvk_surface_create(surface.c_str(), &surf) != NVK_OK)
    return fail_api("loading surface");
  nvk_record rec;
  const nvk_status st = nvk_classify(surf, energy, m, n, N, &ov.opts, &rec);
  nvk_surface_destroy(surf);
  if (st != NVK_OK) return fail_api("classify");
  size_t needed = 0;
  nvk_record_to_json(&rec, nullptr, 0, &needed);
  std::vector<char> buf(needed);
  nvk_record_to_json(&rec, buf.data(), buf.size(), &needed);
  std::printf("%s\n", buf.data());
  return rec.label_kind == NVK_LABEL_UNRESOLVED ? 2 : 0;
}

int cmd_scan(int64_t N, const std::string& out, const std::string& surface, double energy,
             int workers, bool resume, const OptionOverrides& ov) {
  if (N < 1) return fail("--N must be >= 1");
  if (workers < 1) return fail("--workers must be >= 1");
  nvk_surface* surf = nullptr;
  if (nvk_surface_create(surface.c_str(), &surf) != NVK_OK)
    return fail_api("loading surface");
  ProgressState progress;
  const nvk_status st = nvk_scan_run(surf, energy, N, &ov.opts, workers, out.c_str(),
                                     resume ? 1 : 0, progress_cb, &progress, nullptr);
  nvk_surface_destroy(surf);
  if (st != NVK_OK) return fail_api("scan");
  std::fprintf(stderr, "scan: wrote %s\n", out.c_str());
  return 0;
}

int cmd_report_areas(const std::string& in, const std::string& csv_path, bool sphere) {
  nvk_scan* scan = nullptr;
  if (nvk_scan_load(in.c_str(), &scan) != NVK_OK) return fail_api("loading scan");
  nvk_area_table* table = nullptr;
  if (nvk_scan_areas(scan, &table) != NVK_OK) {
    nvk_scan_destroy(scan);
    return fail_api("computing areas");
  }
  std::ostringstream csv;
  csv << "label,area,error\n";
  const int64_t rows = nvk_area_table_row_count(table);
  for (int64_t i = 0; i < rows; ++i) {
    nvk_area_row row;
    nvk_area_table_row(table, i, &row);
    char line[160];
    std::snprintf(line, sizeof line, "\"%s\",%.9g,%.9g\n", label_csv(row).c_str(),
                  sphere ? row.area_sphere : row.area,
                  sphere ? row.error_sphere : row.error);
    csv << line;
  }
  std::fprintf(stderr, "residual (unresolved) area: %.9g\n", nvk_area_table_residual(table));
  nvk_area_table_destroy(table);
  nvk_scan_destroy(scan);
  if (!csv_path.empty()) {
    std::ofstream f(csv_path, std::ios::binary | std::ios::trunc);
    if (!f) return fail("cannot open CSV output '" + csv_path + "'");
    f << csv.str();
    if (!f) return fail("write failure on '" + csv_path + "'");
  } else {
    std::fputs(csv.str().c_str(), stdout);
  }
  return 0;
}

int cmd_report_fracdim(const std::string& in, const std::string& method,
                       const std::string& csv_path) {
  nvk_scan* scan = nullptr;
  if (nvk_scan_load(in.c_str(), &scan) != NVK_OK) return fail_api("loading scan");
  size_t count = 0;
  nvk_scan_ergodic_points(scan, nullptr, 0, &count);
  std::vector<double> xy(2 * count);
  nvk_scan_ergodic_points(scan, xy.data(), count, &count);
  const int64_t N = nvk_scan_grid_n(scan);
  nvk_scan_destroy(scan);
  if (count < 2) return fail("fewer than two unresolved directions; nothing to fit");

  const bool sausage = method == "sausage";
  size_t n_scales = 0;
  nvk_default_scales(N, sausage ? 1 : 0, nullptr, 0, &n_scales);
  std::vector<double> scales(n_scales);
  nvk_default_scales(N, sausage ? 1 : 0, scales.data(), scales.size(), &n_scales);

  nvk_dim_report* report = nullptr;
  const nvk_status st =
      sausage ? nvk_dimension_sausage(xy.data(), count, scales.data(), n_scales, &report)
              : nvk_dimension_box_count(xy.data(), count, scales.data(), n_scales, &report);
  if (st != NVK_OK) return fail_api("dimension fit");

  std::printf("method: %s\n", sausage ? "sausage" : "box");
  std::printf("points: %zu\n", count);
  std::printf("dimension: %.4f\n", nvk_dim_report_dimension(report));
  std::printf("fit_stderr: %.4f\n", nvk_dim_report_stderr(report));
  std::printf("%s\n", sausage ? "radius,measure" : "scale,count");
  std::ostringstream csv;
  csv << (sausage ? "radius,measure\n" : "scale,count\n");
  for (int64_t i = 0; i < nvk_dim_report_scale_count(report); ++i) {
    double s, c;
    nvk_dim_report_scale(report, i, &s, &c);
    std::printf("%.9g,%.9g\n", s, c);
    char line[80];
    std::snprintf(line, sizeof line, "%.9g,%.9g\n", s, c);
    csv << line;
  }
  nvk_dim_report_destroy(report);
  if (!csv_path.empty()) {
    std::ofstream f(csv_path, std::ios::binary | std::ios::trunc);
    if (!f) return fail("cannot open CSV output '" + csv_path + "'");
    f << csv.str();
    if (!f) return fail("write failure on '" + csv_path + "'");
  }
  return 0;
}

int cmd_render(const std::string& in, const std::string& svg, const std::string& ppm,
               int ppm_size, uint64_t palette_seed) {
  if (svg.empty() && ppm.empty()) return fail("render needs --svg and/or --ppm");
  nvk_scan* scan = nullptr;
  if (nvk_scan_load(in.c_str(), &scan) != NVK_OK) return fail_api("loading scan");
  if (!svg.empty() && nvk_render_svg(scan, svg.c_str(), palette_seed) != NVK_OK) {
    nvk_scan_destroy(scan);
    return fail_api("rendering SVG");
  }
  if (!ppm.empty() && nvk_render_ppm(scan, ppm.c_str(), ppm_size, palette_seed) != NVK_OK) {
    nvk_scan_destroy(scan);
    return fail_api("rendering PPM");
  }
  nvk_scan_destroy(scan);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"stability zones of semiclassical electron orbits on a periodic Fermi surface"};
  app.require_subcommand(1);
  app.set_config("--config", "", "key=value config file; flags win over file values");
  app.allow_config_extras(CLI::config_extras_mode::error);

  std::string surface = "simple-cubic";
  double energy = 0.0;

  // classify
  auto* classify = app.add_subcommand("classify", "classify one direction (m,n,N)");
  std::string dir_text;
  classify->add_option("--dir", dir_text, "direction m,n,N")->required();
  classify->add_option("--energy", energy, "energy level (default 0)");
  classify->add_option("--surface", surface, "builtin name or surface file");
  OptionOverrides classify_opts;
  add_tolerance_flags(classify, classify_opts);

  // scan
  auto* scan_cmd = app.add_subcommand("scan", "classify the whole (m/N, n/N, 1) grid");
  int64_t scan_n = 0;
  std::string scan_out;
  int workers = default_workers();
  bool resume = false;
  scan_cmd->add_option("--N", scan_n, "grid parameter N")->required();
  scan_cmd->add_option("--out", scan_out, "output JSONL path")->required();
  scan_cmd->add_option("--energy", energy, "energy level (default 0)");
  scan_cmd->add_option("--surface", surface, "builtin name or surface file");
  scan_cmd->add_option("--workers", workers, "worker threads")->envname("NOVIKOV_WORKERS");
  scan_cmd->add_flag("--resume", resume, "reuse complete records of a partial output file");
  OptionOverrides scan_opts;
  add_tolerance_flags(scan_cmd, scan_opts);

  // report
  auto* report = app.add_subcommand("report", "summarize a scan file");
  std::string report_kind, report_in, report_csv, report_method = "box";
  report->add_option("kind", report_kind, "areas | fracdim")
      ->required()
      ->check(CLI::IsMember({"areas", "fracdim"}));
  report->add_option("--in", report_in, "scan JSONL input")->required();
  report->add_option("--csv", report_csv, "CSV output path (default: stdout for areas)");
  report->add_option("--method", report_method, "fracdim estimator")
      ->check(CLI::IsMember({"box", "sausage"}));
  bool report_sphere = false;
  report->add_flag("--sphere", report_sphere,
                   "report areas as solid-angle sphere fractions instead of flat"
                   " triangle fractions");

  // render
  auto* render = app.add_subcommand("render", "draw the zone map of a scan");
  std::string render_in, render_svg_path, render_ppm_path;
  int ppm_size = 800;
  uint64_t palette_seed = 0;
  render->add_option("--in", render_in, "scan JSONL input")->required();
  render->add_option("--svg", render_svg_path, "SVG output path");
  render->add_option("--ppm", render_ppm_path, "binary PPM (P6) output path");
  render->add_option("--ppm-size", ppm_size, "PPM raster size in pixels");
  render->add_option("--palette-seed", palette_seed, "zone color hash seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;  // stable nonzero exit for any usage error
  }

  if (classify->parsed()) return cmd_classify(dir_text, surface, energy, classify_opts);
  if (scan_cmd->parsed())
    return cmd_scan(scan_n, scan_out, surface, energy, workers, resume, scan_opts);
  if (report->parsed()) {
    if (report_kind == "areas") return cmd_report_areas(report_in, report_csv, report_sphere);
    return cmd_report_fracdim(report_in, report_method, report_csv);
  }
  if (render->parsed())
    return cmd_render(render_in, render_svg_path, render_ppm_path, ppm_size, palette_seed);
  return 1;
}
