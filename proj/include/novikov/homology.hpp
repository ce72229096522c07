#ifndef NOVIKOV_HOMOLOGY_HPP
#define NOVIKOV_HOMOLOGY_HPP

#include <string>
#include <vector>

#include "novikov/vec.hpp"

namespace novikov {

// Rounds a lift displacement to its integer winding vector; each component of
// displacement/2pi must be within `tol` of an integer (throws NonIntegral).
IVec3 winding_from_lift(const Vec3& displacement, double tol);

// v / gcd(|v1|,|v2|,|v3|); throws ZeroVector on (0,0,0).
IVec3 primitive_vector(const IVec3& v);

// The sublattice of Z^3 generated by loop windings for one direction.
// rank <= 2 because every generator is orthogonal to the direction vector h.
struct CycleLattice {
  std::vector<IVec3> generators;
  int rank = 0;
  std::vector<IVec3> basis;  // Hermite-reduced, `rank` rows
};

// Aggregates separatrix-graph cycle classes and orbit windings.
// Throws InvalidGenerator when some generator g has g.h != 0.
CycleLattice cycle_lattice(const std::vector<IVec3>& generators, const IVec3& h);

// Row-style Hermite normal form of the span of `vectors` in Z^3:
// pivots positive, entries below pivots zero, entries above reduced into
// [0, pivot). Returns the nonzero rows.
std::vector<IVec3> hermite_basis(std::vector<IVec3> vectors);

enum class UnresolvedReason { RankOne, DanglingSeparatrix, SolverFailure, Degenerate };

const char* unresolved_reason_name(UnresolvedReason r);
bool parse_unresolved_reason(const std::string& name, UnresolvedReason& out);

// Miller-index label of one field direction: an indivisible 2-cycle of T^3,
// the null label when every traced loop is null-homologous, or a diagnostic
// Unresolved marker.
struct ZoneLabel {
  enum class Kind { Zone, Null, Unresolved };
  Kind kind = Kind::Unresolved;
  IVec3 zone;  // primitive, canonical; valid when kind == Zone
  UnresolvedReason reason = UnresolvedReason::SolverFailure;

  static ZoneLabel make_zone(const IVec3& l) { return {Kind::Zone, l, UnresolvedReason::SolverFailure}; }
  static ZoneLabel make_null() { return {Kind::Null, {}, UnresolvedReason::SolverFailure}; }
  static ZoneLabel make_unresolved(UnresolvedReason r) { return {Kind::Unresolved, {}, r}; }

  bool operator==(const ZoneLabel& o) const {
    if (kind != o.kind) return false;
    if (kind == Kind::Zone) return zone == o.zone;
    if (kind == Kind::Unresolved) return reason == o.reason;
    return true;
  }
  bool operator!=(const ZoneLabel& o) const { return !(*this == o); }
};

// Applies the fixed-energy labeling rule to the winding lattice:
// rank 2 -> Zone(primitive(b1 x b2)), rank 0 -> Null, rank 1 -> Unresolved.
ZoneLabel miller_from_lattice(const CycleLattice& lattice, const IVec3& h);

// Canonical representative of a primitive class. With `symmetric` set the
// 48-element signed-permutation group is applied (components end up sorted
// ascending and nonnegative); otherwise only the overall sign is normalized
// so the last nonzero component is positive.
IVec3 canonical_label(const IVec3& l, bool symmetric);

// True when `v` lies in the lattice spanned by `basis` (integer combination).
bool lattice_contains(const std::vector<IVec3>& basis, const IVec3& v);

}  // namespace novikov

#endif
