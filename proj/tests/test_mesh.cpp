#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <map>

#include "cmcfol/mesh.hpp"

using namespace cmcfol;

namespace {
MarkedPoint mp(double x, double y, double theta) { return MarkedPoint{Vec2(x, y), theta, -1}; }
}

TEST_CASE("flat torus grid") {
  MarkedSurface s = build_torus_mesh({0.0, 1.0}, {}, GradingSpec{0, 1e-3}, 8);
  CHECK(s.n_vertices() == 64);
  CHECK(s.n_faces() == 128);
  CHECK(s.chi_theta() == 0.0);
  double total = 0.0;
  for (int f = 0; f < s.n_faces(); ++f) {
    CHECK(s.face_flat_area(f) > 0.0);
    total += s.face_flat_area(f);
  }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("every edge is shared by exactly two faces") {
  MarkedSurface s = build_torus_mesh({0.3, 1.1}, {mp(0.5, 0.5, kPi / 2)}, GradingSpec{3, 1e-3}, 8);
  std::map<std::pair<int, int>, int> count;
  for (int f = 0; f < s.n_faces(); ++f)
    for (int e = 0; e < 3; ++e) {
      int a = s.face[f][e], b = s.face[f][(e + 1) % 3];
      count[std::minmax(a, b)]++;
    }
  for (const auto& [k, c] : count) CHECK(c == 2);
  CHECK(static_cast<int>(count.size()) == 3 * s.n_faces() / 2);
  CHECK(s.n_vertices() - 3 * s.n_faces() / 2 + s.n_faces() == 0);  // torus
}

TEST_CASE("marked vertex is a mesh vertex and grading is deterministic") {
  MarkedSurface s =
      build_torus_mesh({0.0, 1.0}, {mp(0.5, 0.5, kPi / 2)}, GradingSpec{4, 1e-3}, 8);
  REQUIRE(s.marked.size() == 1);
  int v = s.marked[0].vertex;
  REQUIRE(v >= 0);
  CHECK(s.vertex[v].x() == 0.5);
  CHECK(s.vertex[v].y() == 0.5);
  CHECK(s.marked_of_vertex[v] == 0);

  // frozen face count of the refinement rule at this configuration
  MarkedSurface again =
      build_torus_mesh({0.0, 1.0}, {mp(0.5, 0.5, kPi / 2)}, GradingSpec{4, 1e-3}, 8);
  CHECK(s.n_faces() == again.n_faces());
  CHECK(s.n_vertices() == again.n_vertices());
  for (int i = 0; i < s.n_vertices(); ++i) {
    CHECK(s.vertex[i].x() == again.vertex[i].x());
    CHECK(s.vertex[i].y() == again.vertex[i].y());
  }
  // grading actually refines: strictly more faces than the bare grid
  CHECK(s.n_faces() > 128);
  MESSAGE("face count at res 8 + 4 levels: ", s.n_faces());
}

TEST_CASE("off-grid marked point is inserted exactly") {
  MarkedSurface s =
      build_torus_mesh({0.0, 1.0}, {mp(0.3141, 0.2718, kPi / 3)}, GradingSpec{2, 1e-3}, 8);
  int v = s.marked[0].vertex;
  REQUIRE(v >= 0);
  // snapped to the dyadic sub-lattice, then used verbatim everywhere
  CHECK((s.vertex[v] - s.marked[0].pos).norm() == 0.0);
  CHECK(std::abs(s.vertex[v].x() - 0.3141) < 1e-6);
  s.check_valid();
}

TEST_CASE("construction errors") {
  CHECK_THROWS_WITH_AS(build_torus_mesh({0.0, -1.0}, {}, GradingSpec{0, 1e-3}, 8),
                       doctest::Contains("DegenerateLattice"), Error);
  CHECK_THROWS_WITH_AS(build_torus_mesh({0.0, 1.0}, {mp(0.5, 0.5, 3.5)}, GradingSpec{0, 1e-3}, 8),
                       doctest::Contains("AngleOutOfRange"), Error);
  CHECK_THROWS_WITH_AS(
      build_torus_mesh({0.0, 1.0}, {mp(0.0, 0.0, kPi / 2), mp(0.001, 0.0, kPi / 2)},
                       GradingSpec{2, 0.01}, 8),
      doctest::Contains("MarkedPointsCollide"), Error);
  CHECK_THROWS_AS(build_torus_mesh({0.0, 1.0}, {}, GradingSpec{0, 1e-3}, 2), Error);
}

TEST_CASE("ring ordering around a cone point") {
  MarkedSurface s =
      build_torus_mesh({0.0, 1.0}, {mp(0.5, 0.5, kPi / 2)}, GradingSpec{4, 1e-3}, 16);
  auto ring = s.vertices_by_distance(0);
  REQUIRE(ring.size() == static_cast<std::size_t>(s.n_vertices() - 1));
  for (std::size_t i = 1; i < ring.size(); ++i) CHECK(ring[i - 1].first <= ring[i].first);
  // graded: nearest vertex much closer than the base cell
  CHECK(ring.front().first < 0.5 / 16);
}

TEST_CASE("periodic distance uses the nearest image") {
  MarkedSurface s = build_torus_mesh({0.0, 1.0}, {}, GradingSpec{0, 1e-3}, 8);
  CHECK(s.periodic_distance(Vec2(0.05, 0.0), Vec2(0.95, 0.0)) == doctest::Approx(0.1));
  CHECK(s.periodic_distance(Vec2(0.5, 0.1), Vec2(0.5, 0.9)) == doctest::Approx(0.2));
}
