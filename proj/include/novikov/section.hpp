#ifndef NOVIKOV_SECTION_HPP
#define NOVIKOV_SECTION_HPP

#include <vector>

#include "novikov/direction.hpp"
#include "novikov/surface.hpp"
#include "novikov/vec.hpp"

namespace novikov {

// Every tolerance and limit of the section-dynamics layer. The CLI populates
// one of these; defaults are the working set for the built-in surface.
struct SimOptions {
  // projection targets
  double tol_f = 1e-10;
  double tol_p = 1e-10;
  // closure detection, in turns (fraction of 2*pi per component)
  double tol_close = 1e-6;
  // integrator relative tolerance
  double rel_tol = 1e-9;
  // arc budget = max_len_factor * |h| * 2*pi
  double max_len_factor = 1e3;
  // critical-point machinery
  int seed_grid = 24;
  double crit_residual = 1e-10;
  double dedup_tol = 1e-6;
  double tol_h = 1e-9;
  double saddle_exclusion = 1e-3;
  double capture_radius = 1e-4;
  double seed_offset = 1e-3;
  double eps_branch = 1e-3;
  // regular-orbit sampling
  int levels_per_gap = 2;
  double scanline_spacing = 0.5;
  double scan_step = 0.05;
  double sample_ds = 0.03;
  double orbit_dedup_dist = 2.5e-4;
  // transverse-drift measurement
  double match_tol = 0.01;
  int max_climb_periods = 16;
  double max_climb_arc = 2000.0;
  // labeling
  bool symmetric_labels = true;
  // memory control: drop orbit samples once windings are extracted
  bool keep_samples = true;
};

enum class CriticalKind { Saddle, Extremum, Degenerate };

const char* critical_kind_name(CriticalKind k);

// Critical point of the height function unit.x restricted to {f = E}.
struct CriticalPoint {
  TorusPoint point;     // on {f = E}, position in the fundamental domain
  double mu = 0.0;      // grad f = mu * unit
  CriticalKind kind = CriticalKind::Degenerate;
  double height = 0.0;  // unit . position, reduced mod the height period
  double det_r = 0.0;   // determinant of the restricted Hessian
  double r[2][2] = {{0, 0}, {0, 0}};  // restricted Hessian in the (e1,e2) frame
};

// One traced leaf of the section foliation, closed in the torus.
struct Orbit {
  std::vector<Vec3> samples;  // lifted positions
  Vec3 seed;                  // starting point (kept even when samples drop)
  IVec3 winding;
  double level = 0.0;            // reduced height of the carrying plane
  double closure_residual = 0.0;
  double arc_length = 0.0;
};

struct SeparatrixEdge {
  int from = 0, to = 0;   // vertex indices
  Vec3 displacement;      // exact saddle-to-saddle lift displacement
  std::vector<Vec3> samples;
};

// The singular level component through one group of critical points:
// saddle vertices joined by separatrix edges, with the integer classes of a
// cycle basis of the graph.
struct SeparatrixGraph {
  std::vector<CriticalPoint> vertices;
  std::vector<SeparatrixEdge> edges;
  std::vector<IVec3> cycle_classes;
};

// Tangent field of the section foliation: grad f x unit. Vanishes exactly at
// the critical points of the height function on the level surface.
Vec3 characteristic_velocity(const DispersionRelation& f, const Direction& dir, const Vec3& x);

// All critical points in the fundamental domain, Newton-refined and
// classified. Cross-validates the seed grid against a finer one and throws
// SeedExhaustion when the two disagree.
std::vector<CriticalPoint> find_critical_points(const DispersionRelation& f, double energy,
                                                const Direction& dir, const SimOptions& opts);

// Morse classification via the restricted Hessian
// R = -(1/mu) P^T (Hess f) P in the (e1, e2) frame of the section plane.
// Throws NotCritical if grad f x unit is too large at p.
CriticalKind classify_critical(const DispersionRelation& f, const Direction& dir,
                               const Vec3& p, const SimOptions& opts,
                               double* mu_out = nullptr, double r_out[2][2] = nullptr,
                               double* det_out = nullptr);

// Traces the leaf through x0 (on {f = E}) to closure in the torus.
// `forward` flips the tracing orientation (used by the reversal tests).
Orbit trace_level_orbit(const DispersionRelation& f, double energy, const Direction& dir,
                        const Vec3& x0, const SimOptions& opts,
                        const std::vector<CriticalPoint>& criticals, bool forward = true);

// Builds the separatrix graphs of all critical levels. `criticals` is the
// full critical set; extrema are used only for height bookkeeping.
std::vector<SeparatrixGraph> trace_separatrix_graph(const DispersionRelation& f, double energy,
                                                    const Direction& dir,
                                                    const std::vector<CriticalPoint>& criticals,
                                                    const SimOptions& opts);

// Samples regular leaves on planes interior to the gaps between critical
// heights and traces each distinct one to closure.
std::vector<Orbit> sample_regular_orbits(const DispersionRelation& f, double energy,
                                         const Direction& dir,
                                         const std::vector<double>& critical_heights,
                                         const SimOptions& opts,
                                         const std::vector<CriticalPoint>& criticals);

// Outcome of the transverse-drift search on the open-orbit component.
//   Closed:    a transverse cycle sigma was measured (h.sigma > 0).
//   Exhausted: the component's state space was explored completely and no
//              transverse cycle exists; the structure is the self-centered
//              one of a zone-center direction (2-cycle parallel to h).
//   Dirty:     the search ran out of budget or hit numerical trouble.
enum class DriftOutcome { Closed, Exhausted, Dirty };

// Measures the transverse drift of the open-orbit family: the integer class
// of a loop over the open component joining `open_orbit` to its own lattice
// translate. The search moves across critical levels through straight
// crossings, separatrix-edge midpoints and diagonal saddle hops, validating
// after every move that it is still on the same open family.
DriftOutcome measure_transverse_drift(const DispersionRelation& f, double energy,
                                      const Direction& dir, const Orbit& open_orbit,
                                      const SimOptions& opts,
                                      const std::vector<CriticalPoint>& criticals,
                                      const std::vector<SeparatrixGraph>& graphs, IVec3& sigma);

// Branch ray directions of the singular level curve at a critical point,
// as angles in the (e1, e2) frame. Morse saddles get the null directions of
// the restricted Hessian; degenerate points use angular root-finding of
// f - E on a tangent circle of radius eps_branch.
std::vector<double> branch_angles(const DispersionRelation& f, double energy,
                                  const Direction& dir, const CriticalPoint& cp,
                                  const SimOptions& opts);

}  // namespace novikov

#endif
