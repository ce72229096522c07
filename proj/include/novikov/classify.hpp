#ifndef NOVIKOV_CLASSIFY_HPP
#define NOVIKOV_CLASSIFY_HPP

#include <cstdint>
#include <vector>

#include "novikov/homology.hpp"
#include "novikov/section.hpp"

namespace novikov {

struct Diagnostics {
  int critical_count = 0;
  int saddle_count = 0;
  int orbit_count = 0;
  double max_residual = 0.0;
  double elapsed_ms = 0.0;  // wall time; never serialized into scan files
};

// One classified grid cell.
struct DirectionRecord {
  std::int64_t m = 0, n = 0, N = 1;
  IVec3 h;
  ZoneLabel label;
  Diagnostics diag;
};

// Full trace evidence for one direction; used by tests and invariants.
struct ClassifyDetail {
  std::vector<CriticalPoint> criticals;
  std::vector<SeparatrixGraph> graphs;
  std::vector<Orbit> orbits;
  CycleLattice lattice;
  bool drift_used = false;
  IVec3 drift_sigma;
};

// Runs the whole pipeline for one direction: critical points, separatrix
// graphs, regular orbits, winding lattice, label. Stage errors are encoded
// in the label; this function does not throw.
//
// A rank-1 winding lattice (the generic situation inside a stability zone,
// where every traced class is parallel to the open-orbit direction) is
// resolved by measuring the transverse drift of the open-orbit family: the
// zone class is then primitive(p x sigma).
DirectionRecord classify_direction(const DispersionRelation& f, double energy,
                                   const Direction& dir, const SimOptions& opts,
                                   ClassifyDetail* detail = nullptr);

}  // namespace novikov

#endif
