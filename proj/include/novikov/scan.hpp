#ifndef NOVIKOV_SCAN_HPP
#define NOVIKOV_SCAN_HPP

#include <functional>
#include <string>
#include <vector>

#include "novikov/classify.hpp"
#include "novikov/direction.hpp"

namespace novikov {

extern const char* const kToolVersion;

struct ScanHeader {
  int schema_version = 1;
  std::string surface = "simple-cubic";
  double energy = 0.0;
  std::int64_t N = 1;
  SimOptions opts;
  std::string tool_version = kToolVersion;
};

// One full direction sweep: (N+1)(N+2)/2 records ordered by (m, n).
struct ScanResult {
  ScanHeader header;
  std::vector<DirectionRecord> records;
};

using ProgressFn = std::function<void(std::uint64_t done, std::uint64_t total)>;

// Classifies every grid direction, distributing distinct primitive h over
// `workers` threads. Results are memoized by primitive h and merged in (m,n)
// order, so the output is identical for any worker count. When `out_path` is
// nonempty the result is streamed there as JSON Lines (in order, flushed per
// record) and `resume` reuses the complete records of a partial file.
ScanResult scan(const DispersionRelation& f, double energy, std::int64_t N,
                const SimOptions& opts, int workers, const std::string& out_path = "",
                bool resume = false, ProgressFn progress = nullptr);

}  // namespace novikov

#endif
