#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "cmcfol/metric.hpp"
#include "cmcfol/models.hpp"
#include "cmcfol/solver.hpp"

using namespace cmcfol;

namespace {

std::shared_ptr<MarkedSurface> cone_torus(int res, int levels = 4) {
  return std::make_shared<MarkedSurface>(build_torus_mesh(
      {0.0, 1.0}, {MarkedPoint{Vec2(0.5, 0.5), kPi / 2, -1}}, GradingSpec{levels, 1e-3}, res));
}

} // namespace

TEST_CASE("quadratic differential field in flat coordinates") {
  auto surf = cone_torus(8, 0);
  QuadraticDifferentialField q0 = quad_diff_field(*surf, 0.0);
  CHECK(q0.is_zero());
  // Re(dz^2) = dx^2 - dy^2, Re(i dz^2) = -2 dx dy
  Mat2 r1 = requad_matrix(Complex(1.0, 0.0));
  CHECK(r1(0, 0) == 1.0);
  CHECK(r1(1, 1) == -1.0);
  CHECK(r1(0, 1) == 0.0);
  Mat2 ri = requad_matrix(Complex(0.0, 1.0));
  CHECK(ri(0, 0) == 0.0);
  CHECK(ri(0, 1) == -1.0);
  CHECK(ri(1, 0) == -1.0);
  // coefficient extraction inverts the matrix form
  CHECK(quad_coeff(requad_matrix(Complex(0.3, -0.8))) == Complex(0.3, -0.8));
}

TEST_CASE("operator from a quadratic differential") {
  auto surf = cone_torus(16);
  ConeMetric g0 = background_factor(surf);
  QuadraticDifferentialField q = quad_diff_field(*surf, Complex(0.4, -0.2));
  OperatorField b = operator_from_quaddiff(g0, q);
  for (int v = 0; v < surf->n_vertices(); ++v) {
    CHECK(std::abs(b.trace(v)) < 1e-14);
    CHECK(std::abs(b.m[v](0, 1) - b.m[v](1, 0)) < 1e-14);
    CHECK(b.det(v) <= 0.0);
  }
  // vanishes continuously at the cone vertex
  int mv = surf->marked[0].vertex;
  CHECK(b.m[mv].norm() == 0.0);
}

TEST_CASE("operator norm decay toward the cone point") {
  // for a constant differential the conformal weight alone sets the rate:
  // |b_q| ~ r^{-2 beta} = r^{3/2} for theta = pi/2 (the simple-pole worst
  // case of the continuity bound would be r^{-2 beta - 1} = r^{1/2})
  auto surf = cone_torus(32);
  ConeMetric g0 = background_factor(surf);
  OperatorField b = operator_from_quaddiff(g0, quad_diff_field(*surf, 1.0));
  auto ring = surf->vertices_by_distance(0);
  std::vector<double> lr, ln;
  for (const auto& [r, v] : ring) {
    if (r < 5e-3 || r > 8e-2) continue;
    auto [lo, hi] = b.eigenvalues(v);
    lr.push_back(std::log(r));
    ln.push_back(std::log(std::max(std::abs(lo), std::abs(hi))));
  }
  REQUIRE(lr.size() > 10);
  double n = static_cast<double>(lr.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < lr.size(); ++i) {
    sx += lr[i];
    sy += ln[i];
    sxx += lr[i] * lr[i];
    sxy += lr[i] * ln[i];
  }
  double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  CHECK(slope == doctest::Approx(1.5).epsilon(0.05));
  CHECK(slope > 0.5);  // stronger than the integrability bound: extends to 0
}

TEST_CASE("codazzi residual vanishes for parallel multiples of the identity") {
  auto surf = cone_torus(12, 2);
  ConeMetric g0 = background_factor(surf);
  OperatorField e = OperatorField::identity(surf->n_vertices());
  for (Mat2& m : e.m) m *= 2.7;
  CHECK(codazzi_residual(g0, e) < 1e-13);
}

TEST_CASE("codazzi residual detects non-holomorphic data") {
  // flat torus, b from f(x) = cos(2 pi x): the analytic L2 norm of d^nabla b
  // is pi sqrt(2)
  double expect = kPi * std::sqrt(2.0);
  double prev = -1.0;
  for (int res : {16, 32, 64}) {
    auto surf = std::make_shared<MarkedSurface>(
        build_torus_mesh({0.0, 1.0}, {}, GradingSpec{0, 1e-3}, res));
    ConeMetric g0 = background_factor(surf);
    OperatorField b;
    b.m.resize(surf->n_vertices());
    for (int v = 0; v < surf->n_vertices(); ++v)
      b.m[v] = requad_matrix(Complex(std::cos(2.0 * kPi * surf->vertex[v].x()), 0.0));
    double r = codazzi_residual(g0, b);
    CHECK(r > 3.0);  // bounded away from zero
    if (prev > 0) CHECK(std::abs(r - expect) < std::abs(prev - expect) + 1e-12);
    prev = r;
  }
  CHECK(prev == doctest::Approx(expect).epsilon(0.02));
}

TEST_CASE("codazzi residual of b_q decays under refinement on the cone metric") {
  SolverOptions opts;
  double prev = -1.0;
  for (int res : {16, 32}) {
    auto surf = cone_torus(res);
    ConeMetric h = uniformize(*surf, background_factor(surf), opts);
    OperatorField b = operator_from_quaddiff(h, quad_diff_field(*surf, 0.1));
    double r = codazzi_residual(h, b);
    if (prev > 0.0) CHECK(r < 0.7 * prev);
    prev = r;
  }
}

TEST_CASE("general-metric codazzi agrees with the conformal specialization") {
  auto surf = cone_torus(12, 2);
  SolverOptions opts;
  ConeMetric h = uniformize(*surf, background_factor(surf), opts);
  OperatorField b = operator_from_quaddiff(h, quad_diff_field(*surf, Complex(0.2, 0.1)));
  GramMetric gm{&h, nullptr};
  double a = codazzi_residual(h, b);
  double g = codazzi_residual_gram(gm, b);
  CHECK(a == doctest::Approx(g).epsilon(1e-10));
}

TEST_CASE("model chart metrics") {
  Eigen::Matrix3d flat = model_chart_metric(Chart::Flat, kPi / 2, {0.0, 1.0, 0.0});
  CHECK(flat(0, 0) == -1.0);
  CHECK(flat(1, 1) == 1.0);
  CHECK(flat(2, 2) == 1.0);

  Eigen::Matrix3d ads = model_chart_metric(Chart::AntiDeSitter, kPi / 2, {0.3, 0.1, 0.0});
  CHECK(ads(0, 0) == -1.0);  // -cosh^2(0)
  CHECK(ads(1, 1) == 0.0);   // sinh^2(0): angular direction degenerates on the axis
  CHECK(ads(2, 2) == 1.0);

  Eigen::Matrix3d ds = model_chart_metric(Chart::DeSitter, kPi / 2, {0.0, 0.7, 0.2});
  CHECK(ds(0, 0) == -1.0);
  CHECK(ds(1, 1) == 1.0);
  CHECK(ds(2, 2) == doctest::Approx(std::sin(0.7) * std::sin(0.7)));

  Eigen::Matrix3d hd = model_chart_metric(Chart::HyperbolicDisk, kPi / 2, {0.4, 0.0, 0.0});
  CHECK(hd(0, 0) == 1.0);
  CHECK(hd(1, 1) == doctest::Approx(std::sinh(0.4) * std::sinh(0.4)));

  CHECK_THROWS_WITH_AS(model_chart_metric(Chart::Flat, kPi / 2, {0.0, -1.0, 0.0}),
                       doctest::Contains("ChartDomain"), Error);
  CHECK_THROWS_AS(model_chart_metric(Chart::DeSitter, kPi / 2, {0.0, 4.0, 0.0}), Error);
}

TEST_CASE("geometry catalogue") {
  CHECK(ambient_curvature(Geometry::Minkowski) == 0.0);
  CHECK(ambient_curvature(Geometry::AntiDeSitter) == -1.0);
  CHECK(ambient_curvature(Geometry::DeSitter) == 1.0);
  CHECK(mean_curvature_admissible(Geometry::Minkowski, -1.0));
  CHECK(!mean_curvature_admissible(Geometry::Minkowski, 0.0));
  CHECK(mean_curvature_admissible(Geometry::AntiDeSitter, 5.0));
  CHECK(!mean_curvature_admissible(Geometry::DeSitter, -0.5));
  for (Geometry g : {Geometry::Minkowski, Geometry::AntiDeSitter, Geometry::DeSitter})
    for (double h : {-3.0, -1.5})
      if (mean_curvature_admissible(g, h)) CHECK(ambient_curvature(g) - h * h < 0.0);
}
