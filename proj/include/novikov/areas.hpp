#ifndef NOVIKOV_AREAS_HPP
#define NOVIKOV_AREAS_HPP

#include <array>
#include <vector>

#include "novikov/scan.hpp"

namespace novikov {

// Areas are reported in two normalizations. The flat measure is the
// Lebesgue fraction of the (m/N, n/N) parameter triangle, which is what a
// uniform grid count converges to and what the published N=400 table uses;
// the sphere measure weights each cell by its solid angle, giving the
// fraction of the full sphere by the 48-fold symmetry.
struct AreaRow {
  bool is_null = false;
  IVec3 label;        // canonical zone class; ignored when is_null
  double area = 0.0;  // flat triangle fraction
  double error = 0.0;
  double area_sphere = 0.0;  // fraction of the full sphere
  double error_sphere = 0.0;
};

struct AreaTable {
  std::vector<AreaRow> rows;          // sorted by descending flat area
  double residual_area = 0.0;         // Unresolved fraction, flat measure
  double residual_area_sphere = 0.0;  // same, sphere measure
};

// Solid angle of the grid cell around (m/N, n/N, 1): the spherical image of
// the half-cell square clipped to the fundamental triangle 0 <= x <= y <= N.
double cell_solid_angle(std::int64_t m, std::int64_t n, std::int64_t N);

// Flat area of the same clipped cell, as a fraction of the triangle.
double cell_flat_area(std::int64_t m, std::int64_t n, std::int64_t N);

// Solid angle of the whole fundamental triangle: 4*pi / 48.
double fundamental_triangle_solid_angle();

AreaTable zone_areas(const ScanResult& scan);

// (m/N, n/N) coordinates of the Unresolved records.
std::vector<std::array<double, 2>> extract_ergodic_set(const ScanResult& scan);

}  // namespace novikov

#endif
