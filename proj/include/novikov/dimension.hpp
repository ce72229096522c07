#ifndef NOVIKOV_DIMENSION_HPP
#define NOVIKOV_DIMENSION_HPP

#include <array>
#include <cstdint>
#include <vector>

namespace novikov {

enum class DimensionMethod { BoxCount, Sausage };

struct BoxCountReport {
  DimensionMethod method = DimensionMethod::BoxCount;
  std::vector<double> scales;             // strictly decreasing
  std::vector<double> counts_or_measures; // N(eps) or A(r)
  double dimension = 0.0;
  double fit_stderr = 0.0;
  int fit_lo = 0, fit_hi = 0;  // inclusive index range of the fit
};

// N(eps) over a fixed grid anchored at the origin; dimension is the
// least-squares slope of log N against log(1/eps).
BoxCountReport box_count_dimension(const std::vector<std::array<double, 2>>& points,
                                   const std::vector<double>& scales);

// A(r) = area of the union of radius-r disks, computed on a raster at least
// four times finer than the smallest radius; dimension = 2 - slope of
// log A against log r.
BoxCountReport sausage_dimension(const std::vector<std::array<double, 2>>& points,
                                 const std::vector<double>& radii);

// Default scale ladders for a grid of spacing 1/N over the unit triangle:
// powers of two between 4/N and 1/4.
std::vector<double> default_box_scales(std::int64_t N);
// Geometric ladder over the same window.
std::vector<double> default_sausage_radii(std::int64_t N);

}  // namespace novikov

#endif
