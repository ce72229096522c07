#include "novikov/homology.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "novikov/errors.hpp"
#include "novikov/surface.hpp"

namespace novikov {

IVec3 winding_from_lift(const Vec3& displacement, double tol) {
  IVec3 w;
  for (int i = 0; i < 3; ++i) {
    const double turns = displacement[i] / kTwoPi;
    const double nearest = std::round(turns);
    if (std::fabs(turns - nearest) > tol) {
      std::ostringstream msg;
      msg << "lift displacement component " << i << " = " << displacement[i]
          << " is not an integer multiple of 2*pi (off by "
          << std::fabs(turns - nearest) << " turns, tol " << tol << ")";
      throw NonIntegral(msg.str());
    }
    w[i] = static_cast<std::int64_t>(nearest);
  }
  return w;
}

IVec3 primitive_vector(const IVec3& v) {
  if (v.is_zero()) throw ZeroVector("primitive_vector on (0,0,0)");
  const std::int64_t g = content(v);
  return {v.x / g, v.y / g, v.z / g};
}

std::vector<IVec3> hermite_basis(std::vector<IVec3> rows) {
  rows.erase(std::remove_if(rows.begin(), rows.end(),
                            [](const IVec3& v) { return v.is_zero(); }),
             rows.end());
  std::vector<IVec3> result;
  int pivot_col = 0;
  while (pivot_col < 3 && !rows.empty()) {
    // Reduce the current column by repeated gcd steps.
    bool any = false;
    for (const auto& r : rows)
      if (r[pivot_col] != 0) any = true;
    if (!any) {
      ++pivot_col;
      continue;
    }
    for (;;) {
      // Smallest nonzero entry in this column leads.
      std::size_t best = rows.size();
      for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i][pivot_col] == 0) continue;
        if (best == rows.size() ||
            std::llabs(rows[i][pivot_col]) < std::llabs(rows[best][pivot_col]))
          best = i;
      }
      std::swap(rows[0], rows[best]);
      if (rows[0][pivot_col] < 0) rows[0] = -rows[0];
      bool reduced = true;
      for (std::size_t i = 1; i < rows.size(); ++i) {
        if (rows[i][pivot_col] == 0) continue;
        const std::int64_t q = rows[i][pivot_col] / rows[0][pivot_col];
        rows[i] = rows[i] - rows[0] * q;
        if (rows[i][pivot_col] != 0) reduced = false;
      }
      if (reduced) break;
    }
    result.push_back(rows[0]);
    rows.erase(rows.begin());
    rows.erase(std::remove_if(rows.begin(), rows.end(),
                              [](const IVec3& v) { return v.is_zero(); }),
               rows.end());
    ++pivot_col;
  }
  // Reduce entries above each pivot into [0, pivot).
  for (std::size_t i = 1; i < result.size(); ++i) {
    int col = 0;
    while (col < 3 && result[i][col] == 0) ++col;
    if (col >= 3) continue;
    const std::int64_t p = result[i][col];
    for (std::size_t j = 0; j < i; ++j) {
      std::int64_t q = result[j][col] / p;
      if (result[j][col] - q * p < 0) q -= 1;  // floor division
      result[j] = result[j] - result[i] * q;
    }
  }
  return result;
}

bool lattice_contains(const std::vector<IVec3>& basis, const IVec3& v) {
  // Solve over Z by echelon substitution against the HNF of the basis.
  // Rows below a pivot are zero in that column, so divisibility is decisive.
  std::vector<IVec3> hnf = hermite_basis(basis);
  IVec3 r = v;
  for (const auto& b : hnf) {
    int col = 0;
    while (col < 3 && b[col] == 0) ++col;
    if (col >= 3) continue;
    if (r[col] == 0) continue;
    if (r[col] % b[col] != 0) return false;
    const std::int64_t q = r[col] / b[col];
    r = r - b * q;
  }
  return r.is_zero();
}

CycleLattice cycle_lattice(const std::vector<IVec3>& generators, const IVec3& h) {
  for (const auto& g : generators)
    if (dot(g, h) != 0) {
      std::ostringstream msg;
      msg << "generator " << g << " is not orthogonal to direction " << h;
      throw InvalidGenerator(msg.str());
    }
  CycleLattice lattice;
  lattice.generators = generators;
  lattice.basis = hermite_basis(generators);
  lattice.rank = static_cast<int>(lattice.basis.size());
  return lattice;
}

const char* unresolved_reason_name(UnresolvedReason r) {
  switch (r) {
    case UnresolvedReason::RankOne: return "RankOne";
    case UnresolvedReason::DanglingSeparatrix: return "DanglingSeparatrix";
    case UnresolvedReason::SolverFailure: return "SolverFailure";
    case UnresolvedReason::Degenerate: return "Degenerate";
  }
  return "SolverFailure";
}

bool parse_unresolved_reason(const std::string& name, UnresolvedReason& out) {
  if (name == "RankOne") out = UnresolvedReason::RankOne;
  else if (name == "DanglingSeparatrix") out = UnresolvedReason::DanglingSeparatrix;
  else if (name == "SolverFailure") out = UnresolvedReason::SolverFailure;
  else if (name == "Degenerate") out = UnresolvedReason::Degenerate;
  else return false;
  return true;
}

ZoneLabel miller_from_lattice(const CycleLattice& lattice, const IVec3& h) {
  (void)h;  // part of the operation contract; the basis already encodes it
  if (lattice.rank == 0) return ZoneLabel::make_null();
  if (lattice.rank == 1) return ZoneLabel::make_unresolved(UnresolvedReason::RankOne);
  IVec3 l = cross(lattice.basis[0], lattice.basis[1]);
  if (l.is_zero())
    throw InvalidGenerator("rank-2 lattice with collinear basis");
  l = primitive_vector(l);
  return ZoneLabel::make_zone(canonical_label(l, /*symmetric=*/false));
}

IVec3 canonical_label(const IVec3& l, bool symmetric) {
  if (l.is_zero()) throw ZeroVector("canonical_label on (0,0,0)");
  if (symmetric) {
    IVec3 r{std::llabs(l.x), std::llabs(l.y), std::llabs(l.z)};
    if (r.x > r.y) std::swap(r.x, r.y);
    if (r.y > r.z) std::swap(r.y, r.z);
    if (r.x > r.y) std::swap(r.x, r.y);
    return r;
  }
  IVec3 r = l;
  std::int64_t last = r.z != 0 ? r.z : (r.y != 0 ? r.y : r.x);
  if (last < 0) r = -r;
  return r;
}

}  // namespace novikov
