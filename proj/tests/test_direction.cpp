#include <random>

#include "doctest.h"
#include "novikov/direction.hpp"
#include "novikov/errors.hpp"
#include "novikov/homology.hpp"
#include "novikov/surface.hpp"

using namespace novikov;

TEST_CASE("grid enumeration counts and ordering") {
  auto g1 = enumerate_grid(1);
  REQUIRE(g1.size() == 3);
  CHECK(g1[0].m == 0);
  CHECK(g1[0].n == 0);
  CHECK(g1[1].n == 1);
  CHECK(g1[2].m == 1);

  auto g2 = enumerate_grid(2);
  CHECK(g2.size() == 6);
  // (2,2,2) reduces to (1,1,1)
  CHECK(g2.back().h == IVec3{1, 1, 1});

  CHECK(enumerate_grid(400).size() == 80601);

  // strict lexicographic order in (m, n)
  auto g5 = enumerate_grid(5);
  for (std::size_t i = 1; i < g5.size(); ++i) {
    const bool less = g5[i - 1].m < g5[i].m ||
                      (g5[i - 1].m == g5[i].m && g5[i - 1].n < g5[i].n);
    CHECK(less);
  }
  CHECK_THROWS_AS(enumerate_grid(0), PreconditionViolation);
}

TEST_CASE("direction frames and plane lattices") {
  std::mt19937 rng(31337);
  std::uniform_int_distribution<int> coef(-20, 20);
  int done = 0;
  while (done < 100) {
    IVec3 v{coef(rng), coef(rng), coef(rng)};
    if (v.is_zero()) continue;
    const Direction d = Direction::from_integer(v);
    CHECK(content(d.h) == 1);
    CHECK(norm(d.unit) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(std::fabs(dot(d.e1, d.e2)) < 1e-12);
    CHECK(norm(cross(d.e1, d.e2) - d.unit) < 1e-12);
    CHECK(dot(d.lat1, d.h) == 0);
    CHECK(dot(d.lat2, d.h) == 0);
    // lat1, lat2 generate the full kernel lattice: their cross is +-h.
    const IVec3 c = cross(d.lat1, d.lat2);
    CHECK((c == d.h || c == -d.h));
    CHECK(d.height_period == doctest::Approx(kTwoPi / d.h_norm));
    ++done;
  }
  CHECK_THROWS_AS(Direction::from_integer({0, 0, 0}), ZeroVector);
}

TEST_CASE("reduced heights wrap into one period") {
  const Direction d = Direction::from_mnN(1, 2, 5);
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> u(-40.0, 40.0);
  for (int i = 0; i < 100; ++i) {
    const Vec3 x{u(rng), u(rng), u(rng)};
    const double r = d.reduced_height(x);
    CHECK(r >= 0.0);
    CHECK(r < d.height_period);
    // shifting by a lattice vector leaves the reduced height unchanged
    const Vec3 shifted = x + to_vec3(IVec3{1, -3, 1}) * kTwoPi;
    CHECK(d.reduced_height(shifted) == doctest::Approx(r).epsilon(1e-9));
  }
}
