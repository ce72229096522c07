#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "novikov/errors.hpp"
#include "novikov/homology.hpp"
#include "novikov/section.hpp"

using namespace novikov;

namespace {

bool near_mod_2pi(const Vec3& a, const Vec3& b, double tol) {
  return torus_distance(a, b) < tol;
}

// 2-D marching-squares oracle for the level curve g(x,y) = c of
// g = cos x + cos y over [-pi, pi)^2; returns segment endpoints.
struct Segment2 {
  double x0, y0, x1, y1;
};

std::vector<Segment2> marching_squares(double c, int grid) {
  auto g = [](double x, double y) { return std::cos(x) + std::cos(y); };
  std::vector<Segment2> segments;
  const double lo = -M_PI, step = kTwoPi / grid;
  for (int i = 0; i < grid; ++i)
    for (int j = 0; j < grid; ++j) {
      const double x0 = lo + i * step, x1 = x0 + step;
      const double y0 = lo + j * step, y1 = y0 + step;
      const double v00 = g(x0, y0) - c, v10 = g(x1, y0) - c;
      const double v01 = g(x0, y1) - c, v11 = g(x1, y1) - c;
      std::vector<std::array<double, 2>> pts;
      auto edge = [&](double a, double b, double px0, double py0, double px1, double py1) {
        if ((a < 0) == (b < 0)) return;
        const double t = a / (a - b);
        pts.push_back({px0 + t * (px1 - px0), py0 + t * (py1 - py0)});
      };
      edge(v00, v10, x0, y0, x1, y0);
      edge(v10, v11, x1, y0, x1, y1);
      edge(v11, v01, x1, y1, x0, y1);
      edge(v01, v00, x0, y1, x0, y0);
      if (pts.size() == 2)
        segments.push_back({pts[0][0], pts[0][1], pts[1][0], pts[1][1]});
    }
  return segments;
}

double point_to_segments(double x, double y, const std::vector<Segment2>& segs) {
  double best = 1e30;
  for (const auto& s : segs) {
    const double dx = s.x1 - s.x0, dy = s.y1 - s.y0;
    const double len2 = dx * dx + dy * dy;
    double t = len2 > 1e-30 ? ((x - s.x0) * dx + (y - s.y0) * dy) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    const double ex = x - (s.x0 + t * dx), ey = y - (s.y0 + t * dy);
    best = std::min(best, std::sqrt(ex * ex + ey * ey));
  }
  return best;
}

}  // namespace

TEST_CASE("characteristic velocity is orthogonal to both constraints") {
  auto f = DispersionRelation::simple_cubic();
  const Direction dir = Direction::from_integer({0, 0, 1});
  const Vec3 v = characteristic_velocity(f, dir, {M_PI / 2, 0, 0});
  CHECK(norm(v - Vec3{0, 1, 0}) < 1e-14);

  std::mt19937 rng(88);
  std::uniform_real_distribution<double> u(0.0, kTwoPi);
  const Direction d2 = Direction::from_integer({1, 2, 5});
  for (int i = 0; i < 100; ++i) {
    const Vec3 x{u(rng), u(rng), u(rng)};
    const Vec3 w = characteristic_velocity(f, d2, x);
    const Jet jet = evaluate_jet(f, x);
    CHECK(std::fabs(dot(w, jet.gradient)) < 1e-12);
    CHECK(std::fabs(dot(w, d2.unit)) < 1e-12);
  }
  // vanishes at a critical point of the height function
  CHECK(norm(characteristic_velocity(f, dir, {0, M_PI, M_PI / 2})) < 1e-12);
}

TEST_CASE("critical points of the (0,0,1) section at E=0: four saddles") {
  // Analytic: sin x = sin y = 0 and cos x + cos y + cos z = 0 force
  // (x,y) in {(0,pi),(pi,0)} and cos z = 0.
  auto f = DispersionRelation::simple_cubic();
  const Direction dir = Direction::from_integer({0, 0, 1});
  SimOptions opts;
  auto crit = find_critical_points(f, 0.0, dir, opts);
  REQUIRE(crit.size() == 4);
  const Vec3 expected[4] = {{0, M_PI, M_PI / 2},
                            {0, M_PI, 3 * M_PI / 2},
                            {M_PI, 0, M_PI / 2},
                            {M_PI, 0, 3 * M_PI / 2}};
  for (const auto& e : expected) {
    bool found = false;
    for (const auto& cp : crit)
      if (near_mod_2pi(cp.point.position, e, 1e-8)) {
        found = true;
        CHECK(cp.kind == CriticalKind::Saddle);
      }
    CHECK(found);
  }
}

TEST_CASE("critical points of the (0,0,1) section at E=2.5: two extrema") {
  // Analytic: only (x,y) = (0,0) admits cos z = 1/2; the level component is
  // a small sphere around the band maximum.
  auto f = DispersionRelation::simple_cubic();
  const Direction dir = Direction::from_integer({0, 0, 1});
  SimOptions opts;
  auto crit = find_critical_points(f, 2.5, dir, opts);
  REQUIRE(crit.size() == 2);
  const double zc = std::acos(0.5);
  for (const auto& cp : crit) {
    CHECK(cp.kind == CriticalKind::Extremum);
    const bool a = near_mod_2pi(cp.point.position, {0, 0, zc}, 1e-8);
    const bool b = near_mod_2pi(cp.point.position, {0, 0, kTwoPi - zc}, 1e-8);
    CHECK((a || b));
  }
}

TEST_CASE("critical points of the (1,1,1) section at E=0: two degenerate points") {
  // Analytic: sin x = sin y = sin z with zero cosine sum forces all cosines
  // to vanish; the Hessian vanishes entirely there.
  auto f = DispersionRelation::simple_cubic();
  const Direction dir = Direction::from_integer({1, 1, 1});
  SimOptions opts;
  auto crit = find_critical_points(f, 0.0, dir, opts);
  REQUIRE(crit.size() == 2);
  for (const auto& cp : crit) {
    CHECK(cp.kind == CriticalKind::Degenerate);
    const bool a = near_mod_2pi(cp.point.position, {M_PI / 2, M_PI / 2, M_PI / 2}, 1e-3);
    const bool b =
        near_mod_2pi(cp.point.position, {3 * M_PI / 2, 3 * M_PI / 2, 3 * M_PI / 2}, 1e-3);
    CHECK((a || b));
  }
}

TEST_CASE("classify_critical reproduces the restricted Hessian examples") {
  auto f = DispersionRelation::simple_cubic();
  const Direction dir = Direction::from_integer({0, 0, 1});
  SimOptions opts;

  double mu = 0.0, det = 0.0;
  double r[2][2];
  CHECK(classify_critical(f, dir, {0, M_PI, M_PI / 2}, opts, &mu, r, &det) ==
        CriticalKind::Saddle);
  CHECK(mu == doctest::Approx(-1.0));
  CHECK(det == doctest::Approx(-1.0));

  const double zc = std::acos(0.5);
  CHECK(classify_critical(f, dir, {0, 0, zc}, opts, &mu, r, &det) == CriticalKind::Extremum);
  CHECK(mu == doctest::Approx(-std::sqrt(3.0) / 2));
  // R = (2/sqrt(3)) * diag(-1,-1)
  CHECK(r[0][0] == doctest::Approx(-2.0 / std::sqrt(3.0)));
  CHECK(r[1][1] == doctest::Approx(-2.0 / std::sqrt(3.0)));
  CHECK(det == doctest::Approx(4.0 / 3.0));

  const Direction d111 = Direction::from_integer({1, 1, 1});
  CHECK(classify_critical(f, d111, {M_PI / 2, M_PI / 2, M_PI / 2}, opts) ==
        CriticalKind::Degenerate);

  CHECK_THROWS_AS(classify_critical(f, dir, {0.3, 0.7, 1.1}, opts), NotCritical);
}

TEST_CASE("traced orbit on the z=2 plane matches the marching-squares oracle") {
  auto f = DispersionRelation::simple_cubic();
  const Direction dir = Direction::from_integer({0, 0, 1});
  SimOptions opts;
  auto crit = find_critical_points(f, 0.0, dir, opts);

  // Start on {f=0} at z=2: cos x + cos y = -cos 2.
  const double c = -std::cos(2.0);
  Vec3 seed{std::acos(c / 2.0), std::acos(c / 2.0), 2.0};
  Orbit orbit = trace_level_orbit(f, 0.0, dir, seed, opts, crit);

  CHECK(orbit.winding == IVec3{0, 0, 0});
  CHECK(orbit.closure_residual < 1e-6);

  const auto oracle = marching_squares(c, 1024);
  REQUIRE(oracle.size() > 100);
  double oracle_len = 0.0;
  for (const auto& s : oracle)
    oracle_len += std::hypot(s.x1 - s.x0, s.y1 - s.y0);
  // The oracle length covers the one closed component around the origin.
  CHECK(orbit.arc_length == doctest::Approx(oracle_len).epsilon(0.01));

  for (std::size_t i = 0; i < orbit.samples.size(); i += 3) {
    const TorusPoint p = wrap_point(orbit.samples[i]);
    CHECK(std::fabs(p.position.z - 2.0) < 1e-8);
    // wrap into [-pi, pi) for the oracle's chart
    double px = p.position.x >= M_PI ? p.position.x - kTwoPi : p.position.x;
    double py = p.position.y >= M_PI ? p.position.y - kTwoPi : p.position.y;
    CHECK(point_to_segments(px, py, oracle) < 2e-3);
  }
}

TEST_CASE("orbit constraints and reversal symmetry") {
  auto f = DispersionRelation::simple_cubic();
  const Direction dir = Direction::from_integer({1, 2, 5});
  SimOptions opts;
  auto crit = find_critical_points(f, 0.0, dir, opts);
  std::vector<double> heights;
  for (const auto& cp : crit) heights.push_back(cp.height);
  auto orbits = sample_regular_orbits(f, 0.0, dir, heights, opts, crit);
  REQUIRE(!orbits.empty());

  int checked = 0;
  for (const auto& o : orbits) {
    if (checked >= 3) break;
    ++checked;
    CHECK(dot(o.winding, dir.h) == 0);
    double worst_f = 0.0, worst_p = 0.0;
    const double plane_c = dot(dir.unit, o.samples.front());
    for (const auto& s : o.samples) {
      worst_f = std::max(worst_f, std::fabs(evaluate_value(f, s)));
      worst_p = std::max(worst_p, std::fabs(dot(dir.unit, s) - plane_c));
    }
    CHECK(worst_f < 1e-8);
    CHECK(worst_p < 1e-8);

    // reversed trace covers the same point set with negated winding
    Orbit rev = trace_level_orbit(f, 0.0, dir, o.samples.front(), opts, crit, false);
    CHECK(rev.winding == -o.winding);
    CHECK(rev.arc_length == doctest::Approx(o.arc_length).epsilon(0.01));
    double worst = 0.0;
    for (std::size_t i = 0; i < rev.samples.size(); i += 7) {
      double best = 1e30;
      for (std::size_t j = 0; j < o.samples.size(); ++j)
        best = std::min(best, torus_distance(rev.samples[i], o.samples[j]));
      worst = std::max(worst, best);
    }
    CHECK(worst < 0.05);  // sample-spacing scale
  }
}

TEST_CASE("tracing refuses to start near a critical point") {
  auto f = DispersionRelation::simple_cubic();
  const Direction dir = Direction::from_integer({0, 0, 1});
  SimOptions opts;
  auto crit = find_critical_points(f, 0.0, dir, opts);
  const Vec3 near_saddle{1e-5, M_PI - 1e-5, M_PI / 2};
  CHECK_THROWS_AS(trace_level_orbit(f, 0.0, dir, near_saddle, opts, crit),
                  PreconditionViolation);
}

TEST_CASE("separatrix graphs of the (0,0,1) section at E=0") {
  // Analytic: at z = pi/2 the level factors into the line families
  // x+y = pi and x-y = pi, crossing at the two saddles.
  auto f = DispersionRelation::simple_cubic();
  const Direction dir = Direction::from_integer({0, 0, 1});
  SimOptions opts;
  auto crit = find_critical_points(f, 0.0, dir, opts);
  auto graphs = trace_separatrix_graph(f, 0.0, dir, crit, opts);
  REQUIRE(graphs.size() == 2);  // one connected graph per critical level

  for (const auto& g : graphs) {
    CHECK(g.vertices.size() == 2);
    CHECK(g.edges.size() == 4);
    for (const auto& e : g.edges)
      CHECK(std::fabs(dot(e.displacement, dir.unit)) < 1e-6);
    // the spanned class set contains both line families
    std::vector<IVec3> gens = g.cycle_classes;
    CHECK(lattice_contains(gens, {1, 1, 0}));
    CHECK(lattice_contains(gens, {1, -1, 0}));
    for (const auto& w : g.cycle_classes) CHECK(dot(w, dir.h) == 0);
  }

  // no saddles at E=2.5: empty graph list
  auto crit_sphere = find_critical_points(f, 2.5, dir, opts);
  CHECK(trace_separatrix_graph(f, 2.5, dir, crit_sphere, opts).empty());
}

TEST_CASE("regular orbit sampling covers both sides of the square separatrix") {
  auto f = DispersionRelation::simple_cubic();
  const Direction dir = Direction::from_integer({0, 0, 1});
  SimOptions opts;
  auto crit = find_critical_points(f, 0.0, dir, opts);
  std::vector<double> heights;
  for (const auto& cp : crit) heights.push_back(cp.height);
  auto orbits = sample_regular_orbits(f, 0.0, dir, heights, opts, crit);
  REQUIRE(!orbits.empty());
  for (const auto& o : orbits) CHECK(o.winding == IVec3{0, 0, 0});

  // sphere component at E=2.5: small circles, still winding zero
  auto crit2 = find_critical_points(f, 2.5, dir, opts);
  std::vector<double> h2;
  for (const auto& cp : crit2) h2.push_back(cp.height);
  auto orbits2 = sample_regular_orbits(f, 2.5, dir, h2, opts, crit2);
  REQUIRE(!orbits2.empty());
  for (const auto& o : orbits2) CHECK(o.winding == IVec3{0, 0, 0});
}
