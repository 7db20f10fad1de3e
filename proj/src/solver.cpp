#include "cmcfol/solver.hpp"

#include <cmath>

#include <Eigen/SparseCholesky>

namespace cmcfol {

namespace {

constexpr double kExpClamp = 50.0;

struct ConvexEnergy {
  // value, gradient, Newton diagonal at u; returns false outside the domain
  std::function<bool(const Eigen::VectorXd&, double&, Eigen::VectorXd*, Eigen::VectorXd*)> eval;
  const Eigen::VectorXd* mass = nullptr;  // scaling for the termination norm
};

// dual norm sqrt(sum g_i^2 / m_i): the mass-weighted L2 residual of the
// Euler-Lagrange equation, robust to the tiny cells of the graded mesh
double dual_norm(const Eigen::VectorXd& g, const Eigen::VectorXd& m) {
  double r = 0.0;
  for (int i = 0; i < g.size(); ++i) r += g[i] * g[i] / m[i];
  return std::sqrt(r);
}

ConformalSolution newton_minimize(const SparseMat& S, const ConvexEnergy& energy,
                                  Eigen::VectorXd u, const SolverOptions& opts) {
  opts.validate();
  ConformalSolution sol;
  double val;
  Eigen::VectorXd grad, diag;
  if (!energy.eval(u, val, &grad, &diag))
    fail(ErrorCode::Overflow, "initial guess outside the exponent clamp");

  Eigen::SimplicialLDLT<SparseMat> solver;
  SparseMat hess = S;
  for (int it = 0; it <= opts.max_newton; ++it) {
    double gnorm = dual_norm(grad, *energy.mass);
    sol.log.push_back({it, val, gnorm, it == 0 ? 0.0 : sol.log.back().step});
    if (gnorm <= opts.grad_tol) {
      sol.u = u;
      sol.gradient_norm = gnorm;
      sol.iterations = it;
      sol.functional_value = val;
      return sol;
    }
    if (it == opts.max_newton) break;

    hess = S;
    for (int i = 0; i < diag.size(); ++i) hess.coeffRef(i, i) += diag[i];
    solver.compute(hess);
    if (solver.info() != Eigen::Success)
      fail(ErrorCode::LinearSolveFailure, "Newton system factorization failed");
    Eigen::VectorXd step = solver.solve(-grad);
    if (solver.info() != Eigen::Success)
      fail(ErrorCode::LinearSolveFailure, "Newton system solve failed");

    double slope = grad.dot(step);
    double alpha = 1.0;
    bool accepted = false;
    // rounding slack keeps the final Newton contractions acceptable once the
    // decrease drops below the precision of the functional value
    double slack = 16.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(val));
    for (int bt = 0; bt < 60; ++bt) {
      Eigen::VectorXd trial = u + alpha * step;
      double tval;
      if (energy.eval(trial, tval, nullptr, nullptr) &&
          tval <= val + opts.armijo_c1 * alpha * slope + slack) {
        u = trial;
        sol.log.back().step = alpha;
        accepted = true;
        break;
      }
      alpha *= opts.armijo_backtrack;
    }
    if (!accepted) fail(ErrorCode::NonConvergence, "line search failed");
    energy.eval(u, val, &grad, &diag);
  }
  fail(ErrorCode::NonConvergence,
       "no convergence in " + std::to_string(opts.max_newton) + " Newton steps");
}

} // namespace

ConeMetric uniformize(const MarkedSurface& surface, const ConeMetric& background,
                      const SolverOptions& opts, ConformalSolution* solution_out) {
  if (&background.surface() != &surface)
    fail(ErrorCode::ValidationError, "background does not live on the given surface");
  if (surface.chi_theta() >= -1e-12)
    fail(ErrorCode::PositiveChi, "chi(Sigma,theta) must be negative; add marked points");

  const SparseMat& S = background.bg().stiffness();
  const Eigen::VectorXd& kappa0 = background.curvature_load();
  const Eigen::VectorXd& m0 = background.mass();

  Eigen::VectorXd mass_now = m0;
  ConvexEnergy energy;
  energy.mass = &mass_now;
  energy.eval = [&](const Eigen::VectorXd& v, double& val, Eigen::VectorXd* grad,
                    Eigen::VectorXd* diag) {
    if (v.cwiseAbs().maxCoeff() > kExpClamp) return false;
    Eigen::VectorXd e2v = (2.0 * v).array().exp();
    Eigen::VectorXd Sv = S * v;
    val = 0.5 * v.dot(Sv) + kappa0.dot(v) + 0.5 * m0.dot(e2v);
    if (grad) {
      *grad = Sv + kappa0 + m0.cwiseProduct(e2v);
      mass_now = m0.cwiseProduct(e2v);
    }
    if (diag) *diag = 2.0 * m0.cwiseProduct(e2v);
    return true;
  };

  // constant initial guess from the Gauss-Bonnet balance: area of e^{2v} g0
  // should be -2 pi chi
  double v0 = 0.5 * std::log(-kappa0.sum() / m0.sum());
  Eigen::VectorXd init = opts.initial_guess
                             ? *opts.initial_guess
                             : Eigen::VectorXd::Constant(surface.n_vertices(), v0);
  ConformalSolution sol = newton_minimize(S, energy, init, opts);
  if (solution_out) *solution_out = sol;
  return background.scaled(sol.u);
}

CmcProblem assemble_problem(const ConeMetric& h, const QuadraticDifferentialField& q, double H,
                            ModelGeometry geometry) {
  if (!geometry.admissible_h(H))
    fail(ErrorCode::InadmissibleH,
         "H = " + std::to_string(H) + " outside " + mean_curvature_range(geometry.tag));
  double c_eff = geometry.sec() - H * H;
  if (!(c_eff < 0.0)) fail(ErrorCode::InadmissibleH, "Sec - H^2 must be negative");
  if (h.hyperbolic_residual() > 1e-6)
    fail(ErrorCode::ValidationError, "metric is not uniformized (K != -1)");

  CmcProblem p{h, q, H, geometry, c_eff, {}, h.curvature_load()};
  int nv = h.surface().n_vertices();
  p.D.resize(nv);
  double f2 = std::norm(q.c);
  for (int v = 0; v < nv; ++v) p.D[v] = f2 * h.exp_kw(v, -4.0);
  return p;
}

std::pair<double, Eigen::VectorXd> evaluate_functional(const CmcProblem& p, const Eigen::VectorXd& u) {
  if (u.cwiseAbs().maxCoeff() > kExpClamp)
    fail(ErrorCode::Overflow, "conformal factor exceeds the exponent clamp");
  const SparseMat& S = p.h.bg().stiffness();
  const Eigen::VectorXd& m = p.h.mass();
  Eigen::VectorXd e2u = (2.0 * u).array().exp();
  Eigen::VectorXd em2u = (-2.0 * u).array().exp();
  Eigen::VectorXd Su = S * u;
  double val = 0.5 * u.dot(Su) +
               0.5 * m.dot((-p.c_eff) * e2u + p.D.cwiseProduct(em2u)) + p.kappa.dot(u);
  Eigen::VectorXd grad =
      Su + m.cwiseProduct((-p.c_eff) * e2u - p.D.cwiseProduct(em2u)) + p.kappa;
  return {val, grad};
}

ConformalSolution minimize(const CmcProblem& p, const SolverOptions& opts) {
  const SparseMat& S = p.h.bg().stiffness();
  const Eigen::VectorXd& m = p.h.mass();

  Eigen::VectorXd mass_now = m;
  ConvexEnergy energy;
  energy.mass = &mass_now;
  energy.eval = [&](const Eigen::VectorXd& u, double& val, Eigen::VectorXd* grad,
                    Eigen::VectorXd* diag) {
    if (u.cwiseAbs().maxCoeff() > kExpClamp) return false;
    Eigen::VectorXd e2u = (2.0 * u).array().exp();
    Eigen::VectorXd em2u = (-2.0 * u).array().exp();
    Eigen::VectorXd Su = S * u;
    val = 0.5 * u.dot(Su) + 0.5 * m.dot((-p.c_eff) * e2u + p.D.cwiseProduct(em2u)) +
          p.kappa.dot(u);
    if (grad) {
      *grad = Su + m.cwiseProduct((-p.c_eff) * e2u - p.D.cwiseProduct(em2u)) + p.kappa;
      mass_now = m.cwiseProduct(e2u);
    }
    if (diag)
      *diag = m.cwiseProduct(2.0 * (-p.c_eff) * e2u + 2.0 * p.D.cwiseProduct(em2u));
    return true;
  };

  double u0 = -0.5 * std::log(-p.c_eff);
  Eigen::VectorXd init = opts.initial_guess
                             ? *opts.initial_guess
                             : Eigen::VectorXd::Constant(p.h.surface().n_vertices(), u0);
  return newton_minimize(S, energy, init, opts);
}

Eigen::VectorXd EmbeddingData::mean_curvature() const {
  Eigen::VectorXd h(B.size());
  for (int v = 0; v < B.size(); ++v) h[v] = 0.5 * B.trace(v);
  return h;
}

double EmbeddingData::trace_residual() const {
  if (!H) return 0.0;
  double r = 0.0;
  for (int v = 0; v < B.size(); ++v) r = std::max(r, std::abs(B.trace(v) - 2.0 * *H));
  return r;
}

EmbeddingData build_embedding(const CmcProblem& p, const ConformalSolution& sol) {
  EmbeddingData d;
  d.geometry = p.geometry;
  d.H = p.H;
  d.base = p.h.scaled(sol.u);
  d.q = p.q;
  d.u = sol.u;
  d.B0 = operator_from_quaddiff(d.base, p.q);
  int nv = d.base.surface().n_vertices();
  d.B.m.resize(nv);
  d.lambda.resize(nv);
  d.mu.resize(nv);
  for (int v = 0; v < nv; ++v) {
    d.B.m[v] = d.B0.m[v] + p.H * Mat2::Identity();
    double r = std::sqrt(std::max(0.0, -d.B0.det(v)));
    d.lambda[v] = p.H - r;
    d.mu[v] = p.H + r;
  }
  return d;
}

GaussResidual gauss_residual(const EmbeddingData& data, CurvatureScheme scheme) {
  const MarkedSurface& s = data.surface();
  Eigen::VectorXd ki;
  if (data.frame) {
    GramMetric gm = data.metric();
    ki = angle_defect_curvature(gm);
  } else {
    switch (scheme) {
      case CurvatureScheme::ConformalOperator:
        ki = discrete_curvature(data.base, Eigen::VectorXd::Zero(s.n_vertices()));
        break;
      case CurvatureScheme::QuadraticFit:
        ki = quadratic_fit_curvature(data.base);
        break;
      case CurvatureScheme::AngleDefect: {
        GramMetric gm{&data.base, nullptr};
        ki = angle_defect_curvature(gm);
        break;
      }
    }
  }
  double sec = data.geometry.sec();
  GaussResidual r;
  r.field.resize(s.n_vertices());
  for (int v = 0; v < s.n_vertices(); ++v) {
    if (s.is_marked_vertex(v)) {
      r.field[v] = std::numeric_limits<double>::quiet_NaN();
      continue;
    }
    r.field[v] = data.B.det(v) - sec + ki[v];
    r.sup = std::max(r.sup, std::abs(r.field[v]));
  }
  return r;
}

PrincipalCurvatureReport principal_curvatures(const EmbeddingData& data, double tol) {
  if (data.geometry.tag != Geometry::Minkowski || !data.H || !(*data.H < 0.0))
    fail(ErrorCode::ValidationError, "principal curvature bounds apply to Minkowski H < 0 data");
  const MarkedSurface& s = data.surface();
  double H = *data.H;
  PrincipalCurvatureReport rep;
  rep.lambda = data.lambda;
  rep.mu = data.mu;
  rep.min_lambda = data.lambda.minCoeff();
  rep.max_mu = data.mu.maxCoeff();
  rep.max_umbilicity_defect = (data.mu - data.lambda).maxCoeff();
  rep.bounds_ok = true;
  for (int v = 0; v < s.n_vertices(); ++v) {
    bool ok = (2.0 * H < data.lambda[v]) && (data.lambda[v] <= H + tol) &&
              (H - tol <= data.mu[v]) && (data.mu[v] < 0.0);
    if (!ok) rep.bounds_ok = false;
  }

  rep.cone_umbilicity_defect = 0.0;
  for (const MarkedPoint& mp : s.marked)
    rep.cone_umbilicity_defect =
        std::max(rep.cone_umbilicity_defect, data.mu[mp.vertex] - data.lambda[mp.vertex]);

  // innermost ring: non-marked vertices within twice the smallest marked-vertex
  // spacing of the mesh around each cone
  rep.inner_ring_umbilicity_defect = 0.0;
  for (std::size_t mi = 0; mi < s.marked.size(); ++mi) {
    auto ring = s.vertices_by_distance(static_cast<int>(mi));
    if (ring.empty()) continue;
    double r0 = ring.front().first;
    for (const auto& [rr, v] : ring) {
      if (rr > 2.0 * r0) break;
      rep.inner_ring_umbilicity_defect =
          std::max(rep.inner_ring_umbilicity_defect, data.mu[v] - data.lambda[v]);
    }
  }

  if (!rep.bounds_ok)
    fail(ErrorCode::BoundsViolated, "principal curvatures violate 2H < lambda <= H <= mu < 0");
  return rep;
}

} // namespace cmcfol
