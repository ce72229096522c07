#ifndef NOVIKOV_DIRECTION_HPP
#define NOVIKOV_DIRECTION_HPP

#include <vector>

#include "novikov/vec.hpp"

namespace novikov {

// A rational magnetic-field direction. Carries the primitive integer vector,
// the unit vector, an orthonormal frame of the orthogonal plane, and a
// reduced basis of the rank-2 lattice of integer vectors orthogonal to h
// (the period lattice of the section planes).
struct Direction {
  IVec3 h;              // primitive
  Vec3 unit;            // h / |h|
  double h_norm = 0.0;
  double height_period = 0.0;  // 2*pi / |h|
  Vec3 e1, e2;          // orthonormal, e1 x e2 = unit
  IVec3 lat1, lat2;     // reduced basis of {k in Z^3 : k.h = 0}

  static Direction from_integer(const IVec3& v);
  static Direction from_mnN(std::int64_t m, std::int64_t n, std::int64_t N);

  // Height of a lifted point, reduced into [0, height_period).
  double reduced_height(const Vec3& lifted) const;
};

// One cell of the scan grid: (m, n, N) with 0 <= m <= n <= N.
struct GridDirection {
  std::int64_t m = 0, n = 0, N = 1;
  IVec3 h;  // primitive reduction of (m, n, N)
};

// All pairs 0 <= m <= n <= N in lexicographic order; (N+1)(N+2)/2 entries.
std::vector<GridDirection> enumerate_grid(std::int64_t N);

}  // namespace novikov

#endif
