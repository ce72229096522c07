#include "novikov/areas.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "novikov/errors.hpp"

namespace novikov {

namespace {

constexpr double kPi = 3.14159265358979323846264338328;

// Sutherland-Hodgman clip of a convex polygon against a half-plane
// a*x + b*y <= c.
std::vector<std::array<double, 2>> clip_halfplane(const std::vector<std::array<double, 2>>& poly,
                                                  double a, double b, double c) {
  std::vector<std::array<double, 2>> out;
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    const auto& p = poly[i];
    const auto& q = poly[(i + 1) % n];
    const double dp = a * p[0] + b * p[1] - c;
    const double dq = a * q[0] + b * q[1] - c;
    if (dp <= 0) out.push_back(p);
    if ((dp < 0 && dq > 0) || (dp > 0 && dq < 0)) {
      const double t = dp / (dp - dq);
      out.push_back({p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])});
    }
  }
  return out;
}

Vec3 to_sphere(double x, double y) { return normalized(Vec3{x, y, 1.0}); }

// Van Oosterom-Strackee signed solid angle of the spherical triangle (a,b,c).
double triangle_solid_angle(const Vec3& a, const Vec3& b, const Vec3& c) {
  const double num = dot(a, cross(b, c));
  const double den = 1.0 + dot(a, b) + dot(b, c) + dot(c, a);
  return 2.0 * std::atan2(num, den);
}

double polygon_solid_angle(const std::vector<std::array<double, 2>>& poly) {
  if (poly.size() < 3) return 0.0;
  double cx = 0, cy = 0;
  for (const auto& p : poly) {
    cx += p[0];
    cy += p[1];
  }
  cx /= poly.size();
  cy /= poly.size();
  const Vec3 center = to_sphere(cx, cy);
  double total = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const auto& p = poly[i];
    const auto& q = poly[(i + 1) % poly.size()];
    total += triangle_solid_angle(center, to_sphere(p[0], p[1]), to_sphere(q[0], q[1]));
  }
  return std::fabs(total);
}

// Cell polygon in grid units, clipped to the fundamental triangle.
std::vector<std::array<double, 2>> cell_polygon(std::int64_t m, std::int64_t n, std::int64_t N) {
  const double x = static_cast<double>(m), y = static_cast<double>(n);
  std::vector<std::array<double, 2>> poly = {
      {x - 0.5, y - 0.5}, {x + 0.5, y - 0.5}, {x + 0.5, y + 0.5}, {x - 0.5, y + 0.5}};
  poly = clip_halfplane(poly, -1, 0, 0);                         // x >= 0
  poly = clip_halfplane(poly, 0, 1, static_cast<double>(N));     // y <= N
  poly = clip_halfplane(poly, 1, -1, 0);                         // x <= y
  return poly;
}

struct LabelKey {
  bool is_null;
  IVec3 label;
  bool operator<(const LabelKey& o) const {
    if (is_null != o.is_null) return is_null < o.is_null;
    return label < o.label;
  }
};

}  // namespace

double fundamental_triangle_solid_angle() { return kPi / 12.0; }

double cell_solid_angle(std::int64_t m, std::int64_t n, std::int64_t N) {
  // Scale grid units down to the z=1 plane.
  auto poly = cell_polygon(m, n, N);
  for (auto& p : poly) {
    p[0] /= static_cast<double>(N);
    p[1] /= static_cast<double>(N);
  }
  return polygon_solid_angle(poly);
}

double cell_flat_area(std::int64_t m, std::int64_t n, std::int64_t N) {
  const auto poly = cell_polygon(m, n, N);
  if (poly.size() < 3) return 0.0;
  double twice = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const auto& p = poly[i];
    const auto& q = poly[(i + 1) % poly.size()];
    twice += p[0] * q[1] - q[0] * p[1];
  }
  const double tri = static_cast<double>(N) * static_cast<double>(N) / 2.0;
  return std::fabs(twice) / 2.0 / tri;
}

AreaTable zone_areas(const ScanResult& scan) {
  const std::int64_t N = scan.header.N;
  const auto expected = static_cast<std::size_t>((N + 1) * (N + 2) / 2);
  if (scan.records.size() != expected)
    throw PreconditionViolation("zone_areas: scan record count does not match its grid");

  // (m,n) -> record index for neighbor lookups.
  auto cell_index = [&](std::int64_t m, std::int64_t n) -> std::int64_t {
    if (m < 0 || n < m || n > N) return -1;
    const std::int64_t base = m * (N + 1) - m * (m - 1) / 2;
    return base + (n - m);
  };

  const double omega_tri = fundamental_triangle_solid_angle();
  std::map<LabelKey, double> area_flat, area_sph;
  std::map<LabelKey, double> err_flat, err_sph;
  double residual_flat = 0.0, residual_sph = 0.0;

  std::vector<double> cell_sph(scan.records.size()), cell_flat(scan.records.size());
  for (std::size_t i = 0; i < scan.records.size(); ++i) {
    cell_sph[i] = cell_solid_angle(scan.records[i].m, scan.records[i].n, N);
    cell_flat[i] = cell_flat_area(scan.records[i].m, scan.records[i].n, N);
  }

  for (std::size_t i = 0; i < scan.records.size(); ++i) {
    const auto& rec = scan.records[i];
    if (rec.label.kind == ZoneLabel::Kind::Unresolved) {
      residual_flat += cell_flat[i];
      residual_sph += cell_sph[i];
      continue;
    }
    const LabelKey key{rec.label.kind == ZoneLabel::Kind::Null, rec.label.zone};
    area_flat[key] += cell_flat[i];
    area_sph[key] += cell_sph[i];

    bool boundary = false;
    const std::int64_t deltas[4][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
    for (const auto& d : deltas) {
      const std::int64_t j = cell_index(rec.m + d[0], rec.n + d[1]);
      if (j < 0) continue;  // triangle edge: the mirror cell shares the label
      const auto& other = scan.records[static_cast<std::size_t>(j)].label;
      if (other != rec.label) {
        boundary = true;
        break;
      }
    }
    if (boundary) {
      err_flat[key] += cell_flat[i];
      err_sph[key] += cell_sph[i];
    }
  }

  AreaTable table;
  for (const auto& [key, a] : area_flat) {
    AreaRow row;
    row.is_null = key.is_null;
    row.label = key.label;
    row.area = a;
    row.area_sphere = area_sph[key] / omega_tri;
    auto itf = err_flat.find(key);
    row.error = itf != err_flat.end() ? itf->second : 0.0;
    auto its = err_sph.find(key);
    row.error_sphere = its != err_sph.end() ? its->second / omega_tri : 0.0;
    table.rows.push_back(row);
  }
  table.residual_area = residual_flat;
  table.residual_area_sphere = residual_sph / omega_tri;
  std::sort(table.rows.begin(), table.rows.end(), [](const AreaRow& a, const AreaRow& b) {
    if (a.area != b.area) return a.area > b.area;
    if (a.is_null != b.is_null) return a.is_null < b.is_null;
    return a.label < b.label;
  });
  return table;
}

std::vector<std::array<double, 2>> extract_ergodic_set(const ScanResult& scan) {
  std::vector<std::array<double, 2>> points;
  const double N = static_cast<double>(scan.header.N);
  for (const auto& rec : scan.records)
    if (rec.label.kind == ZoneLabel::Kind::Unresolved)
      points.push_back({static_cast<double>(rec.m) / N, static_cast<double>(rec.n) / N});
  return points;
}

}  // namespace novikov
