#include "novikov/jsonl.hpp"

#include <fstream>

#include "json.hpp"
#include "novikov/errors.hpp"

namespace novikov {

using ordered_json = nlohmann::ordered_json;

namespace {

ordered_json options_to_json(const SimOptions& o) {
  ordered_json j;
  j["tol_f"] = o.tol_f;
  j["tol_p"] = o.tol_p;
  j["tol_close"] = o.tol_close;
  j["rel_tol"] = o.rel_tol;
  j["max_len_factor"] = o.max_len_factor;
  j["seed_grid"] = o.seed_grid;
  j["crit_residual"] = o.crit_residual;
  j["dedup_tol"] = o.dedup_tol;
  j["tol_h"] = o.tol_h;
  j["saddle_exclusion"] = o.saddle_exclusion;
  j["capture_radius"] = o.capture_radius;
  j["seed_offset"] = o.seed_offset;
  j["eps_branch"] = o.eps_branch;
  j["levels_per_gap"] = o.levels_per_gap;
  j["scanline_spacing"] = o.scanline_spacing;
  j["scan_step"] = o.scan_step;
  j["sample_ds"] = o.sample_ds;
  j["orbit_dedup_dist"] = o.orbit_dedup_dist;
  j["match_tol"] = o.match_tol;
  j["max_climb_periods"] = o.max_climb_periods;
  j["max_climb_arc"] = o.max_climb_arc;
  j["symmetric_labels"] = o.symmetric_labels;
  return j;
}

SimOptions options_from_json(const ordered_json& j) {
  SimOptions o;
  o.tol_f = j.at("tol_f").get<double>();
  o.tol_p = j.at("tol_p").get<double>();
  o.tol_close = j.at("tol_close").get<double>();
  o.rel_tol = j.at("rel_tol").get<double>();
  o.max_len_factor = j.at("max_len_factor").get<double>();
  o.seed_grid = j.at("seed_grid").get<int>();
  o.crit_residual = j.at("crit_residual").get<double>();
  o.dedup_tol = j.at("dedup_tol").get<double>();
  o.tol_h = j.at("tol_h").get<double>();
  o.saddle_exclusion = j.at("saddle_exclusion").get<double>();
  o.capture_radius = j.at("capture_radius").get<double>();
  o.seed_offset = j.at("seed_offset").get<double>();
  o.eps_branch = j.at("eps_branch").get<double>();
  o.levels_per_gap = j.at("levels_per_gap").get<int>();
  o.scanline_spacing = j.at("scanline_spacing").get<double>();
  o.scan_step = j.at("scan_step").get<double>();
  o.sample_ds = j.at("sample_ds").get<double>();
  o.orbit_dedup_dist = j.at("orbit_dedup_dist").get<double>();
  o.match_tol = j.at("match_tol").get<double>();
  o.max_climb_periods = j.at("max_climb_periods").get<int>();
  o.max_climb_arc = j.at("max_climb_arc").get<double>();
  o.symmetric_labels = j.at("symmetric_labels").get<bool>();
  return o;
}

ordered_json label_to_json(const ZoneLabel& label) {
  switch (label.kind) {
    case ZoneLabel::Kind::Zone: {
      ordered_json j;
      j["zone"] = {label.zone.x, label.zone.y, label.zone.z};
      return j;
    }
    case ZoneLabel::Kind::Null:
      return ordered_json("null");
    case ZoneLabel::Kind::Unresolved: {
      ordered_json j;
      j["unresolved"] = unresolved_reason_name(label.reason);
      return j;
    }
  }
  return ordered_json("null");
}

ZoneLabel label_from_json(const ordered_json& j) {
  if (j.is_string()) {
    if (j.get<std::string>() == "null") return ZoneLabel::make_null();
    throw ParseError("unknown label string '" + j.get<std::string>() + "'");
  }
  if (j.is_object() && j.contains("zone")) {
    const auto& a = j.at("zone");
    if (!a.is_array() || a.size() != 3) throw ParseError("zone label must be a 3-array");
    return ZoneLabel::make_zone(
        {a[0].get<std::int64_t>(), a[1].get<std::int64_t>(), a[2].get<std::int64_t>()});
  }
  if (j.is_object() && j.contains("unresolved")) {
    UnresolvedReason r;
    if (!parse_unresolved_reason(j.at("unresolved").get<std::string>(), r))
      throw ParseError("unknown unresolved reason");
    return ZoneLabel::make_unresolved(r);
  }
  throw ParseError("unrecognized label value");
}

}  // namespace

std::string header_line(const ScanHeader& h) {
  ordered_json j;
  j["schema_version"] = h.schema_version;
  j["surface"] = h.surface;
  j["E"] = h.energy;
  j["N"] = h.N;
  j["tolerances"] = options_to_json(h.opts);
  j["tool_version"] = h.tool_version;
  return j.dump();
}

std::string record_line(const DirectionRecord& r) {
  ordered_json j;
  j["m"] = r.m;
  j["n"] = r.n;
  j["N"] = r.N;
  j["h"] = {r.h.x, r.h.y, r.h.z};
  j["label"] = label_to_json(r.label);
  ordered_json diag;
  diag["crit"] = r.diag.critical_count;
  diag["saddles"] = r.diag.saddle_count;
  diag["orbits"] = r.diag.orbit_count;
  diag["max_residual"] = r.diag.max_residual;
  j["diag"] = diag;
  return j.dump();
}

ScanHeader parse_header_line(const std::string& line) {
  ordered_json j;
  try {
    j = ordered_json::parse(line);
  } catch (const std::exception& e) {
    throw ParseError(std::string("header: ") + e.what());
  }
  ScanHeader h;
  try {
    h.schema_version = j.at("schema_version").get<int>();
    if (h.schema_version != 1)
      throw ParseError("unsupported schema_version " + std::to_string(h.schema_version));
    h.surface = j.at("surface").get<std::string>();
    h.energy = j.at("E").get<double>();
    h.N = j.at("N").get<std::int64_t>();
    h.opts = options_from_json(j.at("tolerances"));
    h.tool_version = j.at("tool_version").get<std::string>();
  } catch (const ParseError&) {
    throw;
  } catch (const std::exception& e) {
    throw ParseError(std::string("header: ") + e.what());
  }
  return h;
}

DirectionRecord parse_record_line(const std::string& line) {
  ordered_json j;
  try {
    j = ordered_json::parse(line);
  } catch (const std::exception& e) {
    throw ParseError(std::string("record: ") + e.what());
  }
  DirectionRecord r;
  try {
    r.m = j.at("m").get<std::int64_t>();
    r.n = j.at("n").get<std::int64_t>();
    r.N = j.at("N").get<std::int64_t>();
    const auto& h = j.at("h");
    r.h = {h.at(0).get<std::int64_t>(), h.at(1).get<std::int64_t>(), h.at(2).get<std::int64_t>()};
    r.label = label_from_json(j.at("label"));
    const auto& d = j.at("diag");
    r.diag.critical_count = d.at("crit").get<int>();
    r.diag.saddle_count = d.at("saddles").get<int>();
    r.diag.orbit_count = d.at("orbits").get<int>();
    r.diag.max_residual = d.at("max_residual").get<double>();
  } catch (const ParseError&) {
    throw;
  } catch (const std::exception& e) {
    throw ParseError(std::string("record: ") + e.what());
  }
  return r;
}

void write_scan_file(const std::string& path, const ScanResult& scan) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  out << header_line(scan.header) << "\n";
  for (const auto& r : scan.records) out << record_line(r) << "\n";
  if (!out) throw Error("write failure on '" + path + "'");
}

ScanResult read_scan_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  ScanResult scan;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      if (lineno == 1)
        scan.header = parse_header_line(line);
      else
        scan.records.push_back(parse_record_line(line));
    } catch (const ParseError& e) {
      throw ParseError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  if (lineno == 0) throw ParseError(path + ":1: empty scan file");
  return scan;
}

PartialScan read_scan_file_partial(const std::string& path) {
  PartialScan partial;
  std::ifstream in(path, std::ios::binary);
  if (!in) return partial;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) break;
    try {
      if (lineno == 1) {
        partial.header = parse_header_line(line);
        partial.has_header = true;
      } else {
        partial.records.push_back(parse_record_line(line));
      }
    } catch (const ParseError&) {
      break;  // torn tail; resume from the last clean record
    }
  }
  return partial;
}

}  // namespace novikov
