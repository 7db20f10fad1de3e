#include "cmcfol/acceptance.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "cmcfol/foliation.hpp"
#include "cmcfol/io.hpp"
#include "cmcfol/landslide.hpp"

namespace cmcfol {

bool AcceptanceReport::all_pass() const {
  for (const CheckRecord& c : checks)
    if (!c.pass) return false;
  return true;
}

std::string AcceptanceReport::to_csv() const {
  std::ostringstream out;
  out << "name,value,tolerance,pass,detail\n";
  for (const CheckRecord& c : checks)
    out << c.name << "," << fmt17(c.value) << "," << fmt17(c.tolerance) << ","
        << (c.pass ? "1" : "0") << "," << c.detail << "\n";
  return out.str();
}

std::string AcceptanceReport::to_text() const {
  std::ostringstream out;
  for (const CheckRecord& c : checks)
    out << (c.pass ? "PASS" : "FAIL") << "  " << c.name << "  value=" << fmt17(c.value)
        << " tol=" << fmt17(c.tolerance) << (c.detail.empty() ? "" : "  [" + c.detail + "]")
        << "\n";
  return out.str();
}

namespace {

struct Level {
  std::shared_ptr<MarkedSurface> surf;
  ConeMetric h;  // uniformized
};

Level make_level(int res) {
  std::vector<MarkedPoint> marked{{Vec2(0.5, 0.5), kPi / 2.0, -1}};
  auto surf = std::make_shared<MarkedSurface>(
      build_torus_mesh({0.0, 1.0}, marked, GradingSpec{4, 1e-3}, res));
  ConeMetric g0 = background_factor(surf, 16);
  SolverOptions opts;
  opts.grad_tol = 1e-12;
  return Level{surf, uniformize(*surf, g0, opts)};
}

EmbeddingData solve_cmc(const Level& lv, Geometry g, Complex c, double H) {
  CmcProblem p = assemble_problem(lv.h, quad_diff_field(*lv.surf, c), H, ModelGeometry{g});
  return build_embedding(p, minimize(p));
}

void push(AcceptanceReport& rep, const std::string& name, double value, double tol, bool pass,
          const std::string& detail = "") {
  rep.checks.push_back({name, value, tol, pass, detail});
}

void criterion_flow_semigroup(AcceptanceReport& rep) {
  std::mt19937_64 rng(20240501);
  std::uniform_real_distribution<double> eig(-3.0, -0.1), time(-0.3, 0.3);
  double worst = 0.0;
  for (Geometry g : {Geometry::Minkowski, Geometry::AntiDeSitter, Geometry::DeSitter}) {
    ModelGeometry geom{g};
    for (int i = 0; i < 1000; ++i) {
      double l = eig(rng), m = eig(rng), t = time(rng), s = time(rng);
      auto [l1, m1] = flow_point(l, m, t, geom);
      auto [l2, m2] = flow_point(l1, m1, s, geom);
      auto [l3, m3] = flow_point(l, m, t + s, geom);
      worst = std::max({worst, std::abs(l2 - l3), std::abs(m2 - m3)});
    }
  }
  push(rep, "flow_semigroup", worst, 1e-12, worst < 1e-12, "3 geometries x 1000 samples");
}

void criterion_duality_instances(AcceptanceReport& rep) {
  auto [dm, fm] = duality_eval(ModelGeometry{Geometry::Minkowski}, -1.0);
  bool mink = (dm == -0.5) && (fm == -4.0);
  auto [da, fa] = duality_eval(ModelGeometry{Geometry::AntiDeSitter}, -2.0);
  double err_ads = std::max(std::abs(da - kPi / 4.0), std::abs(fa));
  auto [dd, fd] = duality_eval(ModelGeometry{Geometry::DeSitter}, -1.0);
  double err_ds =
      std::max(std::abs(dd - 0.88137358701954305), std::abs(fd - (-1.0606601717798212)));
  bool pass = mink && err_ads <= 1e-14 && err_ds <= 1e-12;
  push(rep, "duality_instances", std::max(err_ads, err_ds), 1e-12, pass,
       mink ? "minkowski instance exact" : "minkowski instance NOT exact");
}

void criterion_umbilic_pipeline(AcceptanceReport& rep, const Level& lv) {
  EmbeddingData d = solve_cmc(lv, Geometry::Minkowski, 0.0, -1.0);
  double uerr = d.u.cwiseAbs().maxCoeff();
  KLeafResult kl = k_leaf_from_cmc(d, 1e-10);
  double kerr = std::max(kl.max_gauss_deviation, std::abs(kl.K + 4.0));
  push(rep, "umbilic_pipeline", std::max(uerr, kerr), 1e-10, uerr < 1e-10 && kerr < 1e-10,
       "u sup " + fmt17(uerr) + "; K dev " + fmt17(kerr));
}

void criterion_gauss_convergence(AcceptanceReport& rep, const std::vector<double>& sups) {
  double r1 = sups[0] / sups[1], r2 = sups[1] / sups[2];
  bool pass = r1 >= 1.8 && r2 >= 1.8;
  push(rep, "gauss_residual_convergence", std::min(r1, r2), 1.8, pass,
       "sups " + fmt17(sups[0]) + " " + fmt17(sups[1]) + " " + fmt17(sups[2]));
}

void criterion_principal_bounds(AcceptanceReport& rep, const EmbeddingData& d) {
  PrincipalCurvatureReport pr = principal_curvatures(d);
  bool cone_ok = pr.cone_umbilicity_defect < 3.0 * pr.inner_ring_umbilicity_defect;
  push(rep, "principal_bounds", pr.cone_umbilicity_defect,
       3.0 * pr.inner_ring_umbilicity_defect, pr.bounds_ok && cone_ok,
       "bounds hold at 100% of vertices; ring defect " +
           fmt17(pr.inner_ring_umbilicity_defect));
}

void criterion_gauss_bonnet(AcceptanceReport& rep, const Level& l32, const Level& l64,
                            const EmbeddingData& d32, const EmbeddingData& d64) {
  double target_unif = 3.0 * kPi / 2.0;
  GramMetric g32{&l32.h, nullptr}, g64{&l64.h, nullptr};
  double e32 = std::abs(area_quadrature(g32) - target_unif) / target_unif;
  double e64 = std::abs(area_quadrature(g64) - target_unif) / target_unif;

  KLeafResult k32 = k_leaf_from_cmc(d32), k64 = k_leaf_from_cmc(d64);
  double target_leaf = 3.0 * kPi / 8.0;
  GramMetric m32 = k32.flow.metric(), m64 = k64.flow.metric();
  double f32 = std::abs(area_quadrature(m32) - target_leaf) / target_leaf;
  double f64 = std::abs(area_quadrature(m64) - target_leaf) / target_leaf;

  bool pass = e32 < 0.01 && e64 < 0.0025 && f32 < 0.01 && f64 < 0.0025;
  push(rep, "gauss_bonnet_areas", std::max({e32, e64, f32, f64}), 0.01, pass,
       "unif " + fmt17(e32) + "/" + fmt17(e64) + " leaf " + fmt17(f32) + "/" + fmt17(f64));
}

void criterion_landslide(AcceptanceReport& rep, const Level& l32, const Level& l64) {
  double worst_ratio = 0.0;
  bool curv_ok = true;
  double worst_res = 0.0;
  for (double H : {-1.0, 0.0, 1.0}) {
    EmbeddingData a32 = solve_cmc(l32, Geometry::AntiDeSitter, 0.1, H);
    LandslidePair pair = landslide_check(a32);
    worst_ratio = std::max(worst_ratio,
                           std::abs(pair.ratio_mean - pair.ratio_expected) + pair.ratio_max_dev);

    EmbeddingData a64 = solve_cmc(l64, Geometry::AntiDeSitter, 0.1, H);
    LandslidePair p64 = left_right_metrics(a64);
    for (const MetricData* side32 :
         {&pair.h_left, &pair.h_right}) {
      const MetricData* side64 = (side32 == &pair.h_left) ? &p64.h_left : &p64.h_right;
      GramMetric gm32 = side32->view(), gm64 = side64->view();
      Eigen::VectorXd k32v = angle_defect_curvature(gm32), k64v = angle_defect_curvature(gm64);
      double r32 = 0.0, r64 = 0.0;
      for (int v = 0; v < k32v.size(); ++v)
        if (!l32.surf->is_marked_vertex(v)) r32 = std::max(r32, std::abs(k32v[v] + 1.0));
      for (int v = 0; v < k64v.size(); ++v)
        if (!l64.surf->is_marked_vertex(v)) r64 = std::max(r64, std::abs(k64v[v] + 1.0));
      if (!(r64 < r32)) curv_ok = false;
      worst_res = std::max(worst_res, r64);
    }
  }
  bool pass = worst_ratio < 1e-8 && curv_ok;
  push(rep, "landslide_identities", worst_ratio, 1e-8, pass,
       std::string("hyperbolicity residual decreases: ") + (curv_ok ? "yes" : "NO") +
           "; refined sup " + fmt17(worst_res));
}

void criterion_ds_monotonic(AcceptanceReport& rep) {
  std::mt19937_64 rng(555777);
  std::uniform_real_distribution<double> eig(-3.0, -1.02), time(0.05, 2.0);
  ModelGeometry ds{Geometry::DeSitter};
  int bad = 0;
  for (int i = 0; i < 200; ++i) {
    double l, m;
    do {
      l = eig(rng);
      m = eig(rng);
    } while (!(l * m > 1.0));
    double t1 = time(rng), t2 = time(rng);
    if (t1 > t2) std::swap(t1, t2);
    if (t2 - t1 < 1e-6) t2 += 1e-3;
    auto [l1, m1] = flow_point(l, m, t1, ds);
    auto [l2, m2] = flow_point(l, m, t2, ds);
    if (!(l1 * m1 > l2 * m2)) ++bad;
  }
  push(rep, "ds_product_monotonic", static_cast<double>(bad), 0.0, bad == 0,
       "violations out of 200");
}

void criterion_solver_uniqueness(AcceptanceReport& rep, const Level& lv) {
  std::mt19937_64 rng(98765);
  std::uniform_real_distribution<double> coef(-0.3, 0.3), hdist(-2.5, -0.3), pert(-0.5, 0.5);
  double worst_diff = 0.0;
  for (int i = 0; i < 5; ++i) {
    Complex c(coef(rng), coef(rng));
    double H = hdist(rng);
    CmcProblem p = assemble_problem(lv.h, quad_diff_field(*lv.surf, c), H,
                                    ModelGeometry{Geometry::Minkowski});
    ConformalSolution s1 = minimize(p);
    SolverOptions o2;
    Eigen::VectorXd guess(lv.surf->n_vertices());
    for (int v = 0; v < guess.size(); ++v) guess[v] = pert(rng);
    o2.initial_guess = guess;
    ConformalSolution s2 = minimize(p, o2);
    worst_diff = std::max(worst_diff, (s1.u - s2.u).cwiseAbs().maxCoeff());
  }

  // gradient against central finite differences on random directions
  CmcProblem p = assemble_problem(lv.h, quad_diff_field(*lv.surf, 0.1), -1.0,
                                  ModelGeometry{Geometry::Minkowski});
  Eigen::VectorXd u0(lv.surf->n_vertices());
  for (int v = 0; v < u0.size(); ++v) u0[v] = 0.2 * pert(rng);
  auto [f0, g0] = evaluate_functional(p, u0);
  double worst_fd = 0.0;
  for (int k = 0; k < 20; ++k) {
    Eigen::VectorXd dir(u0.size());
    for (int v = 0; v < dir.size(); ++v) dir[v] = pert(rng);
    dir /= dir.norm();
    double eps = 1e-5;
    double fp = evaluate_functional(p, u0 + eps * dir).first;
    double fm = evaluate_functional(p, u0 - eps * dir).first;
    double fd = (fp - fm) / (2.0 * eps);
    double an = g0.dot(dir);
    worst_fd = std::max(worst_fd, std::abs(fd - an) / std::max(1.0, std::abs(an)));
  }
  bool pass = worst_diff < 1e-8 && worst_fd < 1e-6;
  push(rep, "solver_uniqueness_gradient", std::max(worst_diff, worst_fd), 1e-6, pass,
       "init-independence " + fmt17(worst_diff) + "; fd " + fmt17(worst_fd));
}

void criterion_dual_construction(AcceptanceReport& rep, const Level& lv) {
  QuadraticDifferentialField q = quad_diff_field(*lv.surf, 0.1);
  double L = dual_embedding_l_bound(lv.h, q, 4.0) - 1e-6;
  EmbeddingData dual = dual_embedding(lv.h, q, L);
  bool range_ok = true;
  for (int v = 0; v < lv.surf->n_vertices(); ++v) {
    double k = -dual.B.det(v);
    if (!(k > -4.0 && k < 0.0)) range_ok = false;
  }
  MetricData third = third_form(dual);
  GramMetric tf = third.view(), href{&lv.h, nullptr};
  double third_err = gram_max_rel_diff(tf, href);

  std::vector<FoliationLeaf> leaves =
      sweep(lv.h, q, ModelGeometry{Geometry::Minkowski}, {-4.0, -2.0, -1.0, -0.5});
  bool mono = true;
  std::string mono_err;
  try {
    ordering_report(leaves);
  } catch (const Error& e) {
    mono = false;
    mono_err = e.what();
  }
  bool pass = range_ok && third_err < 1e-10 && mono;
  push(rep, "dual_construction", third_err, 1e-10, pass,
       std::string(range_ok ? "K in (-4,0)" : "K range violated") +
           "; areas monotone: " + (mono ? "yes" : mono_err));
}

AcceptanceReport run_once() {
  AcceptanceReport rep;
  Level l32 = make_level(32);
  Level l64 = make_level(64);
  Level l128 = make_level(128);

  EmbeddingData d32 = solve_cmc(l32, Geometry::Minkowski, 0.1, -1.0);
  EmbeddingData d64 = solve_cmc(l64, Geometry::Minkowski, 0.1, -1.0);
  EmbeddingData d128 = solve_cmc(l128, Geometry::Minkowski, 0.1, -1.0);

  criterion_flow_semigroup(rep);
  criterion_duality_instances(rep);
  criterion_umbilic_pipeline(rep, l32);
  criterion_gauss_convergence(
      rep, {gauss_residual(d32).sup, gauss_residual(d64).sup, gauss_residual(d128).sup});
  criterion_principal_bounds(rep, d32);
  criterion_gauss_bonnet(rep, l32, l64, d32, d64);
  criterion_landslide(rep, l32, l64);
  criterion_ds_monotonic(rep);
  criterion_solver_uniqueness(rep, l32);
  criterion_dual_construction(rep, l32);
  return rep;
}

} // namespace

AcceptanceReport run_acceptance(bool with_determinism) {
  AcceptanceReport rep = run_once();
  if (with_determinism) {
    AcceptanceReport second = run_once();
    bool same = rep.to_csv() == second.to_csv();
    push(rep, "determinism", same ? 0.0 : 1.0, 0.0, same,
         "full suite rerun byte-compares the reports");
  }
  return rep;
}

} // namespace cmcfol
