#ifndef NOVIKOV_JSONL_HPP
#define NOVIKOV_JSONL_HPP

#include <string>

#include "novikov/scan.hpp"

namespace novikov {

// JSON Lines scan files: line 1 is the header object, then one record per
// line. Serialization is canonical (fixed key order, shortest round-trip
// floats) so equal scans produce byte-identical files.

std::string header_line(const ScanHeader& h);
std::string record_line(const DirectionRecord& r);

ScanHeader parse_header_line(const std::string& line);     // throws ParseError
DirectionRecord parse_record_line(const std::string& line);  // throws ParseError

void write_scan_file(const std::string& path, const ScanResult& scan);

// Strict reader: malformed lines raise ParseError mentioning the line number.
ScanResult read_scan_file(const std::string& path);

// Tolerant reader for checkpoint resume: stops at the first malformed or
// truncated line and reports how many records were read cleanly.
struct PartialScan {
  ScanHeader header;
  std::vector<DirectionRecord> records;
  bool has_header = false;
};
PartialScan read_scan_file_partial(const std::string& path);

}  // namespace novikov

#endif
