#include <cstdio>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "novikov.h"

namespace {

struct TempPath {
  std::string path;
  explicit TempPath(const char* name) : path(std::string("/tmp/novikov_capi_") + name) {}
  ~TempPath() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("surface creation, evaluation and errors through the C API") {
  CHECK(std::string(nvk_version()) == "0.1.0");

  nvk_surface* surf = nullptr;
  REQUIRE(nvk_surface_create("simple-cubic", &surf) == NVK_OK);
  CHECK(std::string(nvk_surface_name(surf)) == "simple-cubic");

  const double x[3] = {0, 0, 0};
  double value = 0, grad[3], hess[9];
  REQUIRE(nvk_surface_eval(surf, x, &value, grad, hess) == NVK_OK);
  CHECK(value == doctest::Approx(3.0));
  CHECK(hess[0] == doctest::Approx(-1.0));
  nvk_surface_destroy(surf);

  nvk_surface* bad = nullptr;
  CHECK(nvk_surface_parse("junk 1,0,0 1.0\n", "bad", &bad) == NVK_ERR_PARSE);
  CHECK(std::string(nvk_last_error()).find("cos") != std::string::npos);
  CHECK(nvk_surface_create("/nonexistent/path.surf", &bad) == NVK_ERR_PARSE);
}

TEST_CASE("classification and record serialization through the C API") {
  nvk_surface* surf = nullptr;
  REQUIRE(nvk_surface_create("simple-cubic", &surf) == NVK_OK);
  nvk_options opts;
  nvk_options_default(&opts);
  CHECK(opts.seed_grid == 24);

  nvk_record rec;
  REQUIRE(nvk_classify(surf, 0.0, 0, 0, 1, &opts, &rec) == NVK_OK);
  CHECK(rec.label_kind == NVK_LABEL_ZONE);
  CHECK(rec.zone[0] == 0);
  CHECK(rec.zone[2] == 1);
  CHECK(rec.critical_count == 4);

  size_t needed = 0;
  REQUIRE(nvk_record_to_json(&rec, nullptr, 0, &needed) == NVK_OK);
  std::vector<char> buf(needed);
  REQUIRE(nvk_record_to_json(&rec, buf.data(), buf.size(), &needed) == NVK_OK);
  CHECK(std::string(buf.data()).find("\"zone\":[0,0,1]") != std::string::npos);

  CHECK(nvk_classify(surf, 0.0, 0, 0, 0, &opts, &rec) == NVK_ERR_INVALID_ARGUMENT);
  nvk_surface_destroy(surf);
}

TEST_CASE("scan, areas, ergodic set, dimension and render through the C API") {
  nvk_surface* surf = nullptr;
  REQUIRE(nvk_surface_create("simple-cubic", &surf) == NVK_OK);
  nvk_options opts;
  nvk_options_default(&opts);

  TempPath file("scan.jsonl");
  nvk_scan* scan = nullptr;
  REQUIRE(nvk_scan_run(surf, 0.0, 3, &opts, 2, file.path.c_str(), 0, nullptr, nullptr,
                       &scan) == NVK_OK);
  REQUIRE(scan != nullptr);
  CHECK(nvk_scan_record_count(scan) == 10);
  CHECK(nvk_scan_grid_n(scan) == 3);
  CHECK(std::string(nvk_scan_surface(scan)) == "simple-cubic");

  nvk_scan* loaded = nullptr;
  REQUIRE(nvk_scan_load(file.path.c_str(), &loaded) == NVK_OK);
  CHECK(nvk_scan_record_count(loaded) == 10);
  nvk_record a, b;
  nvk_scan_record(scan, 4, &a);
  nvk_scan_record(loaded, 4, &b);
  CHECK(a.label_kind == b.label_kind);
  CHECK(a.h[0] == b.h[0]);
  nvk_scan_destroy(loaded);

  nvk_area_table* table = nullptr;
  REQUIRE(nvk_scan_areas(scan, &table) == NVK_OK);
  REQUIRE(nvk_area_table_row_count(table) >= 1);
  double total = nvk_area_table_residual(table);
  double total_sphere = 0.0;
  for (int64_t i = 0; i < nvk_area_table_row_count(table); ++i) {
    nvk_area_row row;
    REQUIRE(nvk_area_table_row(table, i, &row) == NVK_OK);
    total += row.area;
    total_sphere += row.area_sphere;
  }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
  nvk_area_table_destroy(table);

  size_t count = 0;
  REQUIRE(nvk_scan_ergodic_points(scan, nullptr, 0, &count) == NVK_OK);

  TempPath svg("map.svg"), ppm("map.ppm");
  REQUIRE(nvk_render_svg(scan, svg.path.c_str(), 0) == NVK_OK);
  REQUIRE(nvk_render_ppm(scan, ppm.path.c_str(), 64, 0) == NVK_OK);
  {
    std::ifstream s(svg.path);
    std::string first;
    std::getline(s, first);
    CHECK(first.find("xml") != std::string::npos);
    std::ifstream p(ppm.path, std::ios::binary);
    std::string magic(2, '\0');
    p.read(magic.data(), 2);
    CHECK(magic == "P6");
  }

  nvk_scan_destroy(scan);
  nvk_surface_destroy(surf);
}

TEST_CASE("dimension estimators through the C API") {
  std::vector<double> xy;
  for (int i = 0; i < 64; ++i)
    for (int j = 0; j < 64; ++j) {
      xy.push_back(i / 64.0);
      xy.push_back(j / 64.0);
    }
  size_t n_scales = 0;
  REQUIRE(nvk_default_scales(64, 0, nullptr, 0, &n_scales) == NVK_OK);
  std::vector<double> scales(n_scales);
  REQUIRE(nvk_default_scales(64, 0, scales.data(), scales.size(), &n_scales) == NVK_OK);

  nvk_dim_report* report = nullptr;
  REQUIRE(nvk_dimension_box_count(xy.data(), xy.size() / 2, scales.data(), n_scales,
                                  &report) == NVK_OK);
  CHECK(nvk_dim_report_dimension(report) == doctest::Approx(2.0).epsilon(0.05));
  CHECK(nvk_dim_report_scale_count(report) == static_cast<int64_t>(n_scales));
  double s0 = 0, c0 = 0;
  REQUIRE(nvk_dim_report_scale(report, 0, &s0, &c0) == NVK_OK);
  CHECK(s0 == doctest::Approx(scales[0]));
  nvk_dim_report_destroy(report);

  // degenerate input surfaces as an error status
  const double two_same[4] = {0.5, 0.5, 0.5, 0.5};
  CHECK(nvk_dimension_box_count(two_same, 2, scales.data(), n_scales, &report) ==
        NVK_ERR_INVALID_ARGUMENT);
}
