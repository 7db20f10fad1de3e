#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "cmcfol/io.hpp"

using namespace cmcfol;

namespace {

std::string minimal_config(const std::string& geometry, const std::string& grid) {
  return std::string("{\"surface\": {\"tau\": [0,1], \"resolution\": 8, "
                     "\"grading\": {\"levels\": 2, \"min_radius\": 1e-3}, "
                     "\"marked\": [{\"x\": 0.5, \"y\": 0.5, \"theta\": 1.5707963267948966}]}, "
                     "\"geometry\": \"") +
         geometry + "\", \"q\": [0.1, 0], " + grid + "}";
}

} // namespace

TEST_CASE("float formatting round trips") {
  for (double x : {0.1, 1.0 / 3.0, -4.0, 1e-300, 3.141592653589793, 0.88137358701954305}) {
    CHECK(std::stod(fmt17(x)) == x);
  }
}

TEST_CASE("config parsing and validation") {
  RunConfig ok = parse_config_text(minimal_config("minkowski", "\"h_grid\": [-1.0]"));
  CHECK(ok.geometry == Geometry::Minkowski);
  CHECK(ok.h_grid.size() == 1);
  CHECK(ok.marked.size() == 1);

  CHECK_THROWS_WITH_AS(parse_config_text("{ not json"), doctest::Contains("ParseError"), Error);
  // dS mean curvature range
  CHECK_THROWS_WITH_AS(parse_config_text(minimal_config("ds", "\"h_grid\": [-0.5]")),
                       doctest::Contains("(-inf, -1)"), Error);
  // cone angle out of range
  std::string bad_angle = minimal_config("minkowski", "\"h_grid\": [-1.0]");
  bad_angle.replace(bad_angle.find("1.5707963267948966"), 18, "3.5000000000000000");
  CHECK_THROWS_WITH_AS(parse_config_text(bad_angle), doctest::Contains("ValidationError"), Error);
  // exactly one grid
  CHECK_THROWS_AS(
      parse_config_text(minimal_config("minkowski", "\"h_grid\": [-1.0], \"k_grid\": [-4.0]")),
      Error);
  // sorted grids
  CHECK_THROWS_AS(parse_config_text(minimal_config("minkowski", "\"h_grid\": [-1.0, -2.0]")),
                  Error);
  // zero grad_tol is allowed by validation (it fails later as NonConvergence)
  RunConfig zero = parse_config_text(
      minimal_config("minkowski", "\"h_grid\": [-1.0], \"solver\": {\"grad_tol\": 0.0}"));
  CHECK(zero.solver.grad_tol == 0.0);
}

TEST_CASE("mesh dump round trip") {
  MarkedSurface s = build_torus_mesh({0.0, 1.0}, {MarkedPoint{Vec2(0.5, 0.5), kPi / 2, -1}},
                                     GradingSpec{2, 1e-3}, 8);
  Eigen::VectorXd f1(s.n_vertices()), f2(s.n_vertices());
  for (int v = 0; v < s.n_vertices(); ++v) {
    f1[v] = std::sin(3.0 * v) / 7.0;
    f2[v] = 1.0 / (v + 1.0);
  }
  std::string text = mesh_dump(s, {{"alpha", f1}, {"beta", f2}}, {{"KIND", "test"}});
  MeshDumpData d = read_mesh_dump(text);
  CHECK(d.surface.n_vertices() == s.n_vertices());
  CHECK(d.surface.n_faces() == s.n_faces());
  CHECK(d.keys.at("KIND") == "test");
  for (int v = 0; v < s.n_vertices(); ++v) {
    CHECK(d.surface.vertex[v] == s.vertex[v]);
    CHECK(d.field("alpha")[v] == f1[v]);  // exact: 17 significant digits
    CHECK(d.field("beta")[v] == f2[v]);
  }
  for (int f = 0; f < s.n_faces(); ++f)
    for (int c = 0; c < 3; ++c) {
      CHECK(d.surface.face[f][c] == s.face[f][c]);
      CHECK((d.surface.corner[f][c] - s.corner[f][c]).norm() < 1e-12);
    }
  CHECK(d.surface.marked[0].vertex == s.marked[0].vertex);

  // byte determinism of the writer
  CHECK(mesh_dump(s, {{"alpha", f1}, {"beta", f2}}, {{"KIND", "test"}}) == text);
}

TEST_CASE("embedding dump round trip") {
  auto surf = std::make_shared<MarkedSurface>(build_torus_mesh(
      {0.0, 1.0}, {MarkedPoint{Vec2(0.5, 0.5), kPi / 2, -1}}, GradingSpec{3, 1e-3}, 8));
  SolverOptions opts;
  opts.grad_tol = 1e-12;
  ConeMetric h = uniformize(*surf, background_factor(surf), opts);
  CmcProblem p = assemble_problem(h, quad_diff_field(*surf, Complex(0.1, 0.02)), 0.4,
                                  ModelGeometry{Geometry::AntiDeSitter});
  EmbeddingData data = build_embedding(p, minimize(p));

  std::string text = dump_embedding(data, h.smooth());
  EmbeddingData back = embedding_from_dump(read_mesh_dump(text), 16);
  CHECK(back.geometry.tag == Geometry::AntiDeSitter);
  CHECK(*back.H == 0.4);
  CHECK((back.u - data.u).cwiseAbs().maxCoeff() == 0.0);
  for (int v = 0; v < surf->n_vertices(); ++v)
    CHECK((back.B.m[v] - data.B.m[v]).norm() < 1e-14);
}

TEST_CASE("solver log csv shape") {
  ConformalSolution sol;
  sol.log.push_back({0, 1.5, 0.2, 0.0});
  sol.log.push_back({1, 1.2, 1e-11, 1.0});
  std::string csv = solver_log_csv(sol);
  CHECK(csv.find("iteration,value,gradient_norm,step\n") == 0);
  CHECK(csv.find("\n0,1.5,") != std::string::npos);
}

TEST_CASE("fnv1a is stable") {
  CHECK(fnv1a("") == 14695981039346656037ull);  // offset basis
  CHECK(fnv1a("cmcfol") == fnv1a("cmcfol"));
  CHECK(fnv1a("a") != fnv1a("b"));
}
