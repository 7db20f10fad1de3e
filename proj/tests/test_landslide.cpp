#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "cmcfol/landslide.hpp"

using namespace cmcfol;

namespace {

struct Setup {
  std::shared_ptr<MarkedSurface> surf;
  ConeMetric h;
};

Setup uniformized(int res) {
  auto surf = std::make_shared<MarkedSurface>(build_torus_mesh(
      {0.0, 1.0}, {MarkedPoint{Vec2(0.5, 0.5), kPi / 2, -1}}, GradingSpec{4, 1e-3}, res));
  SolverOptions opts;
  opts.grad_tol = 1e-12;
  return {surf, uniformize(*surf, background_factor(surf), opts)};
}

EmbeddingData solve(const Setup& s, Geometry g, Complex c, double H) {
  CmcProblem p = assemble_problem(s.h, quad_diff_field(*s.surf, c), H, ModelGeometry{g});
  return build_embedding(p, minimize(p));
}

} // namespace

TEST_CASE("hopf data of the gauss and projection maps") {
  Setup s = uniformized(12);
  SUBCASE("umbilic data has zero Hopf differential") {
    EmbeddingData d = solve(s, Geometry::Minkowski, 0.0, -1.0);
    HopfDatum g = hopf_from_embedding(d, HopfSource::Gauss);
    for (const Complex& c : g.face_coeff) CHECK(std::abs(c) == 0.0);
    CHECK(g.holo_residual == 0.0);
    // energy density of the umbilic Gauss map is H^2
    CHECK(g.energy_density.maxCoeff() == doctest::Approx(1.0));
  }
  SUBCASE("constant differential: coefficient H c, opposite pair") {
    Complex c(0.1, -0.04);
    double H = -1.3;
    EmbeddingData d = solve(s, Geometry::Minkowski, c, H);
    HopfDatum g = hopf_from_embedding(d, HopfSource::Gauss);
    HopfDatum pr = hopf_from_embedding(d, HopfSource::Projection);
    for (int f = 0; f < s.surf->n_faces(); ++f) {
      CHECK(std::abs(g.face_coeff[f] - H * c) < 1e-12);
      CHECK(std::abs(g.face_coeff[f] + pr.face_coeff[f]) < 1e-14);
    }
    CHECK(g.holo_residual < 1e-11);
    for (int v = 0; v < s.surf->n_vertices(); ++v)
      CHECK(g.energy_density[v] >= H * H - 1e-13);  // e = H^2 - det B0 >= H^2
  }
}

TEST_CASE("dbar residual of face fields") {
  auto flat = std::make_shared<MarkedSurface>(
      build_torus_mesh({0.0, 1.0}, {}, GradingSpec{0, 1e-3}, 32));
  SUBCASE("constant fields are holomorphic to rounding") {
    std::vector<Complex> field(flat->n_faces(), Complex(0.3, 0.7));
    CHECK(holomorphicity_residual_field(field, *flat) == 0.0);
  }
  SUBCASE("antiholomorphic perturbation is bounded below: |dbar cos(2 pi x)| = pi/sqrt(2)") {
    double expect = kPi / std::sqrt(2.0);
    double prev = -1.0;
    for (int res : {16, 32, 64}) {
      auto s = std::make_shared<MarkedSurface>(
          build_torus_mesh({0.0, 1.0}, {}, GradingSpec{0, 1e-3}, res));
      std::vector<Complex> field(s->n_faces());
      for (int f = 0; f < s->n_faces(); ++f) {
        Vec2 c = (s->corner[f][0] + s->corner[f][1] + s->corner[f][2]) / 3.0;
        field[f] = std::cos(2.0 * kPi * c.x());
      }
      double r = holomorphicity_residual_field(field, *s);
      CHECK(r > 1.0);
      if (prev > 0.0) CHECK(std::abs(r - expect) <= std::abs(prev - expect) + 1e-12);
      prev = r;
    }
    CHECK(prev == doctest::Approx(expect).epsilon(0.05));
  }
}

TEST_CASE("left and right metrics of an AdS surface") {
  Setup s = uniformized(12);
  SUBCASE("maximal umbilic surface: h_l = h_r = I, curvature -1") {
    EmbeddingData d = solve(s, Geometry::AntiDeSitter, 0.0, 0.0);
    LandslidePair pair = left_right_metrics(d);
    CHECK(pair.min_composite_det == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(pair.alpha == doctest::Approx(kPi / 2));
    for (int v : {0, 13}) {
      CHECK((pair.h_left.comp.m[v] - Mat2::Identity()).norm() < 1e-10);
      CHECK((pair.h_right.comp.m[v] - Mat2::Identity()).norm() < 1e-10);
    }
    GramMetric gl = pair.h_left.view();
    Eigen::VectorXd k = angle_defect_curvature(gl);
    double sup = 0.0;
    for (int v = 0; v < s.surf->n_vertices(); ++v)
      if (!s.surf->is_marked_vertex(v)) sup = std::max(sup, std::abs(k[v] + 1.0));
    CHECK(sup < 0.05);
  }
  SUBCASE("det(E +- J B) = 1 + det B") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    Mat2 J = rot_j();
    for (int i = 0; i < 50; ++i) {
      Mat2 b;
      double a = dist(rng), bb = dist(rng), dd = dist(rng);
      b << a, bb, bb, dd;
      CHECK((Mat2::Identity() + J * b).determinant() ==
            doctest::Approx(1.0 + b.determinant()).epsilon(1e-13));
      CHECK((Mat2::Identity() - J * b).determinant() ==
            doctest::Approx(1.0 + b.determinant()).epsilon(1e-13));
    }
  }
  SUBCASE("hyperbolicity residual of h_l decreases under refinement") {
    double prev = -1.0;
    for (int res : {12, 24}) {
      Setup sr = uniformized(res);
      EmbeddingData d = solve(sr, Geometry::AntiDeSitter, 0.1, 0.0);
      LandslidePair pair = left_right_metrics(d);
      GramMetric gl = pair.h_left.view();
      Eigen::VectorXd k = angle_defect_curvature(gl);
      double sup = 0.0;
      for (int v = 0; v < sr.surf->n_vertices(); ++v)
        if (!sr.surf->is_marked_vertex(v)) sup = std::max(sup, std::abs(k[v] + 1.0));
      if (prev > 0.0) CHECK(sup < prev);
      prev = sup;
    }
  }
}

TEST_CASE("landslide ratio and angle") {
  Setup s = uniformized(12);
  for (double H : {-1.0, 0.0, 1.0}) {
    EmbeddingData d = solve(s, Geometry::AntiDeSitter, 0.1, H);
    LandslidePair pair = landslide_check(d);
    Complex expected = Complex(H, 1.0) / Complex(H, -1.0);
    CHECK(std::abs(pair.ratio_mean - expected) < 1e-10);
    CHECK(pair.ratio_max_dev < 1e-10);
    // alpha = -arctan(H) + pi/2 in (0, pi), with e^{2 i alpha} = ratio
    CHECK(pair.alpha > 0.0);
    CHECK(pair.alpha < kPi);
    Complex e2ia = std::exp(Complex(0.0, 2.0 * pair.alpha));
    CHECK(std::abs(e2ia - expected) < 1e-14);
  }
  // the three instances: H=0 -> -1, H=1 -> i, H=-1 -> -i
  EmbeddingData d0 = solve(s, Geometry::AntiDeSitter, 0.1, 0.0);
  CHECK(std::abs(landslide_check(d0).ratio_mean - Complex(-1.0, 0.0)) < 1e-10);
  EmbeddingData d1 = solve(s, Geometry::AntiDeSitter, 0.1, 1.0);
  CHECK(std::abs(landslide_check(d1).ratio_mean - Complex(0.0, 1.0)) < 1e-10);
  EmbeddingData dm1 = solve(s, Geometry::AntiDeSitter, 0.1, -1.0);
  CHECK(std::abs(landslide_check(dm1).ratio_mean - Complex(0.0, -1.0)) < 1e-10);

  // q = 0 has no usable ratio
  EmbeddingData dz = solve(s, Geometry::AntiDeSitter, 0.0, 0.5);
  CHECK_THROWS_WITH_AS(landslide_check(dz), doctest::Contains("ZeroHopf"), Error);
}

TEST_CASE("minimal lagrangian certificate") {
  Setup s = uniformized(12);
  SUBCASE("umbilic: b = E with zero residuals") {
    EmbeddingData d = solve(s, Geometry::Minkowski, 0.0, -1.0);
    MinimalLagrangianCertificate cert = minimal_lagrangian_certificate(d);
    CHECK(cert.det_residual < 1e-12);
    CHECK(cert.positive);
    for (int v : {0, 21}) CHECK((cert.b.m[v] - Mat2::Identity()).norm() < 1e-10);
    CHECK(cert.codazzi_res < 1e-10);
    CHECK(cert.cone_limit_residual < 1e-10);
  }
  SUBCASE("generic data: det 1 exactly, positivity, decay toward the cone") {
    EmbeddingData d = solve(s, Geometry::Minkowski, 0.1, -1.0);
    MinimalLagrangianCertificate cert = minimal_lagrangian_certificate(d);
    CHECK(cert.det_residual < 1e-10);  // algebraic identity for tr B = 2H
    CHECK(cert.positive);
    REQUIRE(cert.ring_deviation.size() > 3);
    // eigenvalues approach 1 toward the marked vertex
    CHECK(cert.ring_deviation.front().second < cert.ring_deviation.back().second);
    CHECK(cert.cone_limit_residual < 0.05);
  }
  SUBCASE("codazzi residual of b decays under refinement") {
    double prev = -1.0;
    for (int res : {12, 24}) {
      Setup sr = uniformized(res);
      EmbeddingData d = solve(sr, Geometry::Minkowski, 0.1, -1.0);
      double r = minimal_lagrangian_certificate(d).codazzi_res;
      if (prev > 0.0) CHECK(r < prev);
      prev = r;
    }
  }
}
