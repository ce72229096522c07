#include "novikov/direction.hpp"

#include <cmath>
#include <tuple>

#include "novikov/errors.hpp"
#include "novikov/homology.hpp"
#include "novikov/surface.hpp"

namespace novikov {

namespace {

// Extended gcd: returns g = gcd(a,b) and coefficients with a*s + b*t = g.
std::int64_t ext_gcd(std::int64_t a, std::int64_t b, std::int64_t& s, std::int64_t& t) {
  if (b == 0) {
    s = a >= 0 ? 1 : -1;
    t = 0;
    return std::llabs(a);
  }
  std::int64_t s1, t1;
  std::int64_t g = ext_gcd(b, a % b, s1, t1);
  s = t1;
  t = s1 - (a / b) * t1;
  return g;
}

// Basis of the kernel lattice {k : k.h = 0} for primitive h.
void kernel_basis(const IVec3& h, IVec3& v1, IVec3& v2) {
  if (h.x == 0 && h.y == 0) {
    // h = (0, 0, +-1)
    v1 = {1, 0, 0};
    v2 = {0, 1, 0};
    return;
  }
  std::int64_t s, t;
  const std::int64_t g = ext_gcd(h.x, h.y, s, t);  // s*h1 + t*h2 = g
  v1 = {h.y / g, -h.x / g, 0};
  v2 = {-s * h.z, -t * h.z, g};
}

// Lagrange (Gauss) reduction of a rank-2 lattice basis.
void reduce_basis(IVec3& a, IVec3& b) {
  auto sqn = [](const IVec3& v) { return dot(v, v); };
  if (sqn(a) > sqn(b)) std::swap(a, b);
  for (int guard = 0; guard < 64; ++guard) {
    const double mu = static_cast<double>(dot(a, b)) / static_cast<double>(sqn(a));
    const std::int64_t q = static_cast<std::int64_t>(std::llround(mu));
    if (q != 0) b = b - a * q;
    if (sqn(b) >= sqn(a)) break;
    std::swap(a, b);
  }
}

}  // namespace

Direction Direction::from_integer(const IVec3& v) {
  if (v.is_zero()) throw ZeroVector("direction vector is (0,0,0)");
  Direction d;
  d.h = primitive_vector(v);
  const Vec3 hv = to_vec3(d.h);
  d.h_norm = norm(hv);
  d.unit = hv / d.h_norm;
  d.height_period = kTwoPi / d.h_norm;
  kernel_basis(d.h, d.lat1, d.lat2);
  reduce_basis(d.lat1, d.lat2);
  d.e1 = normalized(to_vec3(d.lat1));
  d.e2 = cross(d.unit, d.e1);  // unit-length; (e1, e2, unit) right-handed
  return d;
}

Direction Direction::from_mnN(std::int64_t m, std::int64_t n, std::int64_t N) {
  return from_integer({m, n, N});
}

double Direction::reduced_height(const Vec3& lifted) const {
  double c = std::fmod(dot(unit, lifted), height_period);
  if (c < 0) c += height_period;
  if (c >= height_period) c -= height_period;
  return c;
}

std::vector<GridDirection> enumerate_grid(std::int64_t N) {
  if (N < 1) throw PreconditionViolation("grid size N must be >= 1");
  std::vector<GridDirection> grid;
  grid.reserve(static_cast<std::size_t>((N + 1) * (N + 2) / 2));
  for (std::int64_t m = 0; m <= N; ++m)
    for (std::int64_t n = m; n <= N; ++n) {
      GridDirection g;
      g.m = m;
      g.n = n;
      g.N = N;
      g.h = primitive_vector({m, n, N});
      grid.push_back(g);
    }
  return grid;
}

}  // namespace novikov
