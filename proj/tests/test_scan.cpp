#include <cstdio>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "novikov/errors.hpp"
#include "novikov/jsonl.hpp"
#include "novikov/scan.hpp"

using namespace novikov;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct TempFile {
  std::string path;
  explicit TempFile(const std::string& name) : path("/tmp/novikov_test_" + name) {}
  ~TempFile() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("N=1 scan structure") {
  auto f = DispersionRelation::simple_cubic();
  SimOptions opts;
  ScanResult s = scan(f, 0.0, 1, opts, 2);
  REQUIRE(s.records.size() == 3);
  CHECK(s.records[0].m == 0);
  CHECK(s.records[0].n == 0);
  CHECK(s.records[0].label.kind == ZoneLabel::Kind::Zone);
  CHECK(s.records[0].label.zone == IVec3{0, 0, 1});
  CHECK(s.records[2].h == IVec3{1, 1, 1});
}

TEST_CASE("scan files are byte-identical across worker counts") {
  auto f = DispersionRelation::simple_cubic();
  SimOptions opts;
  TempFile f1("workers1.jsonl"), f2("workers2.jsonl");
  scan(f, 0.0, 3, opts, 1, f1.path);
  scan(f, 0.0, 3, opts, 2, f2.path);
  const std::string a = slurp(f1.path), b = slurp(f2.path);
  REQUIRE(!a.empty());
  CHECK(a == b);
}

TEST_CASE("resume from a truncated file reproduces the clean run") {
  auto f = DispersionRelation::simple_cubic();
  SimOptions opts;
  TempFile clean("clean.jsonl"), cut("cut.jsonl");
  scan(f, 0.0, 3, opts, 2, clean.path);
  const std::string full = slurp(clean.path);

  // Cut mid-way through a record line to fake an interrupted run.
  std::ofstream out(cut.path, std::ios::binary);
  out << full.substr(0, full.size() * 2 / 3);
  out.close();

  scan(f, 0.0, 3, opts, 2, cut.path, /*resume=*/true);
  CHECK(slurp(cut.path) == full);
}

TEST_CASE("resume rejects a mismatching configuration") {
  auto f = DispersionRelation::simple_cubic();
  SimOptions opts;
  TempFile file("mismatch.jsonl");
  scan(f, 0.0, 2, opts, 1, file.path);
  SimOptions other = opts;
  other.seed_grid = 20;
  CHECK_THROWS_AS(scan(f, 0.0, 2, other, 1, file.path, true), Error);
}

TEST_CASE("scan file round trip preserves every record") {
  auto f = DispersionRelation::simple_cubic();
  SimOptions opts;
  TempFile file("roundtrip.jsonl");
  ScanResult s = scan(f, 0.0, 3, opts, 2, file.path);
  ScanResult r = read_scan_file(file.path);
  REQUIRE(r.records.size() == s.records.size());
  CHECK(r.header.N == 3);
  CHECK(r.header.surface == "simple-cubic");
  for (std::size_t i = 0; i < r.records.size(); ++i) {
    CHECK(r.records[i].m == s.records[i].m);
    CHECK(r.records[i].n == s.records[i].n);
    CHECK(r.records[i].h == s.records[i].h);
    CHECK(r.records[i].label == s.records[i].label);
    CHECK(r.records[i].diag.max_residual == s.records[i].diag.max_residual);
  }
  // serialized form is stable
  CHECK(record_line(r.records[1]) == record_line(s.records[1]));
}

TEST_CASE("malformed scan lines report their line number") {
  TempFile file("broken.jsonl");
  {
    std::ofstream out(file.path, std::ios::binary);
    ScanHeader header;
    out << header_line(header) << "\n";
    out << "{\"m\":0,\"n\":0,\"N\":1,\"h\":[0,0,1],\"label\":\"null\",\"diag\":{\"crit\":0,"
           "\"saddles\":0,\"orbits\":0,\"max_residual\":0.0}}\n";
    out << "{this is not json}\n";
  }
  try {
    read_scan_file(file.path);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find(":3:") != std::string::npos);
  }
}

TEST_CASE("header schema version is enforced") {
  CHECK_THROWS_AS(parse_header_line("{\"schema_version\":99}"), ParseError);
}
