#include "novikov/dimension.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <unordered_set>

#include "novikov/errors.hpp"

namespace novikov {

namespace {

struct FitResult {
  double slope = 0.0;
  double stderr_slope = 0.0;
};

FitResult fit_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
  const std::size_t n = xs.size();
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sx += xs[i];
    sy += ys[i];
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  FitResult r;
  r.slope = sxy / sxx;
  if (n > 2) {
    double ss = 0;
    const double icpt = my - r.slope * mx;
    for (std::size_t i = 0; i < n; ++i) {
      const double e = ys[i] - (icpt + r.slope * xs[i]);
      ss += e * e;
    }
    r.stderr_slope = std::sqrt(ss / (n - 2) / sxx);
  }
  return r;
}

void validate_scales(const std::vector<double>& scales) {
  if (scales.size() < 2) throw DegenerateInput("need at least two scales");
  for (std::size_t i = 1; i < scales.size(); ++i)
    if (!(scales[i] < scales[i - 1]))
      throw DegenerateInput("scales must be strictly decreasing");
  for (double s : scales)
    if (!(s > 0)) throw DegenerateInput("scales must be positive");
}

void validate_points(const std::vector<std::array<double, 2>>& points) {
  if (points.size() < 2) throw DegenerateInput("need at least two points");
  bool distinct = false;
  for (std::size_t i = 1; i < points.size() && !distinct; ++i)
    if (points[i][0] != points[0][0] || points[i][1] != points[0][1]) distinct = true;
  if (!distinct) throw DegenerateInput("need at least two distinct points");
}

// Felzenszwalb-Huttenlocher 1-D squared distance transform.
void dt_1d(std::vector<double>& f, std::vector<double>& d, std::vector<int>& v,
           std::vector<double>& z, int n) {
  int k = 0;
  v[0] = 0;
  z[0] = -std::numeric_limits<double>::infinity();
  z[1] = std::numeric_limits<double>::infinity();
  for (int q = 1; q < n; ++q) {
    double s;
    for (;;) {
      s = ((f[q] + q * static_cast<double>(q)) - (f[v[k]] + v[k] * static_cast<double>(v[k]))) /
          (2.0 * q - 2.0 * v[k]);
      if (s <= z[k]) {
        --k;
      } else {
        break;
      }
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = std::numeric_limits<double>::infinity();
  }
  k = 0;
  for (int q = 0; q < n; ++q) {
    while (z[k + 1] < q) ++k;
    const double dq = q - static_cast<double>(v[k]);
    d[q] = dq * dq + f[v[k]];
  }
}

}  // namespace

BoxCountReport box_count_dimension(const std::vector<std::array<double, 2>>& points,
                                   const std::vector<double>& scales) {
  validate_points(points);
  validate_scales(scales);

  BoxCountReport report;
  report.method = DimensionMethod::BoxCount;
  report.scales = scales;
  for (double eps : scales) {
    std::unordered_set<std::uint64_t> boxes;
    for (const auto& p : points) {
      const auto ix = static_cast<std::int64_t>(std::floor(p[0] / eps));
      const auto iy = static_cast<std::int64_t>(std::floor(p[1] / eps));
      boxes.insert((static_cast<std::uint64_t>(ix + (1 << 20)) << 32) |
                   static_cast<std::uint64_t>(iy + (1 << 20)));
    }
    report.counts_or_measures.push_back(static_cast<double>(boxes.size()));
  }

  std::vector<double> xs, ys;
  int lo = -1, hi = -1;
  for (std::size_t i = 0; i < scales.size(); ++i) {
    if (report.counts_or_measures[i] <= 0) continue;
    if (lo < 0) lo = static_cast<int>(i);
    hi = static_cast<int>(i);
    xs.push_back(std::log(1.0 / scales[i]));
    ys.push_back(std::log(report.counts_or_measures[i]));
  }
  if (xs.size() < 2) throw DegenerateInput("fewer than two scales admit nonzero counts");
  const FitResult fit = fit_slope(xs, ys);
  report.dimension = std::clamp(fit.slope, 0.0, 2.0);
  report.fit_stderr = fit.stderr_slope;
  report.fit_lo = lo;
  report.fit_hi = hi;
  return report;
}

BoxCountReport sausage_dimension(const std::vector<std::array<double, 2>>& points,
                                 const std::vector<double>& radii) {
  validate_points(points);
  validate_scales(radii);

  const double r_min = radii.back();
  const double r_max = radii.front();
  const double step = r_min / 4.0;

  double min_x = points[0][0], max_x = points[0][0];
  double min_y = points[0][1], max_y = points[0][1];
  for (const auto& p : points) {
    min_x = std::min(min_x, p[0]);
    max_x = std::max(max_x, p[0]);
    min_y = std::min(min_y, p[1]);
    max_y = std::max(max_y, p[1]);
  }
  const double pad = r_max + 2 * step;
  const double x0 = min_x - pad, y0 = min_y - pad;
  const int w = static_cast<int>(std::ceil((max_x - min_x + 2 * pad) / step)) + 1;
  const int h = static_cast<int>(std::ceil((max_y - min_y + 2 * pad) / step)) + 1;
  if (static_cast<long long>(w) * h > 80LL * 1000 * 1000)
    throw DegenerateInput("sausage raster too large; raise the minimum radius");

  // Large finite sentinel: infinities would turn the envelope arithmetic
  // of the distance transform into NaNs on empty rows.
  const double far2 = 1e18;
  std::vector<double> grid(static_cast<std::size_t>(w) * h, far2);
  for (const auto& p : points) {
    const int ix = static_cast<int>(std::round((p[0] - x0) / step));
    const int iy = static_cast<int>(std::round((p[1] - y0) / step));
    if (ix >= 0 && ix < w && iy >= 0 && iy < h)
      grid[static_cast<std::size_t>(iy) * w + ix] = 0.0;
  }

  // Two-pass exact Euclidean distance transform (in pixel units).
  {
    const int n = std::max(w, h);
    std::vector<double> f(n), d(n), z(n + 1);
    std::vector<int> v(n);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) f[x] = grid[static_cast<std::size_t>(y) * w + x];
      dt_1d(f, d, v, z, w);
      for (int x = 0; x < w; ++x) grid[static_cast<std::size_t>(y) * w + x] = d[x];
    }
    for (int x = 0; x < w; ++x) {
      for (int y = 0; y < h; ++y) f[y] = grid[static_cast<std::size_t>(y) * w + x];
      dt_1d(f, d, v, z, h);
      for (int y = 0; y < h; ++y) grid[static_cast<std::size_t>(y) * w + x] = d[y];
    }
  }

  BoxCountReport report;
  report.method = DimensionMethod::Sausage;
  report.scales = radii;
  for (double r : radii) {
    const double r_px = r / step;
    const double r2 = r_px * r_px;
    std::size_t count = 0;
    for (double g : grid)
      if (g <= r2) ++count;
    report.counts_or_measures.push_back(static_cast<double>(count) * step * step);
  }

  std::vector<double> xs, ys;
  int lo = -1, hi = -1;
  for (std::size_t i = 0; i < radii.size(); ++i) {
    if (report.counts_or_measures[i] <= 0) continue;
    if (lo < 0) lo = static_cast<int>(i);
    hi = static_cast<int>(i);
    xs.push_back(std::log(radii[i]));
    ys.push_back(std::log(report.counts_or_measures[i]));
  }
  if (xs.size() < 2) throw DegenerateInput("fewer than two radii admit nonzero measures");
  const FitResult fit = fit_slope(xs, ys);
  report.dimension = std::clamp(2.0 - fit.slope, 0.0, 2.0);
  report.fit_stderr = fit.stderr_slope;
  report.fit_lo = lo;
  report.fit_hi = hi;
  return report;
}

std::vector<double> default_box_scales(std::int64_t N) {
  std::vector<double> scales;
  const double floor_scale = 4.0 / static_cast<double>(N);
  for (double eps = 0.25; eps >= floor_scale * 0.999; eps /= 2.0) scales.push_back(eps);
  if (scales.size() < 2) scales = {0.25, 0.125};
  return scales;
}

std::vector<double> default_sausage_radii(std::int64_t N) {
  // Same window as the box ladder so the two estimators see the same scales.
  const double r_lo = 4.0 / static_cast<double>(N);
  const double r_hi = 0.25;
  std::vector<double> radii;
  const int steps = 6;
  for (int i = 0; i < steps; ++i) {
    const double t = static_cast<double>(i) / (steps - 1);
    radii.push_back(r_hi * std::pow(r_lo / r_hi, t));
  }
  if (!(radii.front() > radii.back())) radii = {0.25, 0.05, 0.01};
  return radii;
}

}  // namespace novikov
