#pragma once

#include <optional>

#include "cmcfol/metric.hpp"
#include "cmcfol/models.hpp"

namespace cmcfol {

struct SolverOptions {
  double grad_tol = 1e-10;      // mass-weighted dual norm of the gradient at termination
  int max_newton = 50;
  double armijo_c1 = 1e-4;
  double armijo_backtrack = 0.5;
  double linear_tol = 1e-12;
  std::optional<Eigen::VectorXd> initial_guess;  // default: the flat-balance constant

  void validate() const {
    if (grad_tol < 0 || max_newton <= 0 || armijo_c1 <= 0 || armijo_backtrack <= 0 ||
        armijo_backtrack >= 1 || linear_tol < 0)
      fail(ErrorCode::ValidationError, "solver options out of range");
  }
};

struct ConformalSolution {
  Eigen::VectorXd u;
  double gradient_norm = 0.0;
  int iterations = 0;
  double functional_value = 0.0;
  struct LogRow {
    int iteration;
    double value, gradient_norm, step;
  };
  std::vector<LogRow> log;
};

/// Conformal factor v with e^{2v} * background hyperbolic (K = -1) away from
/// the cone points. The discrete minimizer satisfies kappa = -mass exactly,
/// so the Gauss-Bonnet area -2 pi chi(Sigma,theta) is reproduced to solver
/// tolerance.
ConeMetric uniformize(const MarkedSurface& surface, const ConeMetric& background,
                      const SolverOptions& opts = {}, ConformalSolution* solution_out = nullptr);

struct CmcProblem {
  ConeMetric h;  // uniformized
  QuadraticDifferentialField q;
  double H = 0.0;
  ModelGeometry geometry;
  double c_eff = 0.0;     // Sec - H^2, negative on admissible ranges
  Eigen::VectorXd D;      // |f|^2 e^{-4 w_h} = -det(h^{-1} Re q) per vertex
  Eigen::VectorXd kappa;  // integrated curvature of h per vertex (~ -mass)
};

CmcProblem assemble_problem(const ConeMetric& h, const QuadraticDifferentialField& q, double H,
                            ModelGeometry geometry);

/// Convex energy whose critical point is the conformal factor of the CMC
/// surface:
///   F(u) = 1/2 int ( |grad u|^2 + (-c_eff) e^{2u} - e^{-2u} det(h^{-1}Re q)
///                    + 2 K_h u ) dA_h
/// Throws Overflow when |u| exceeds 50 anywhere.
std::pair<double, Eigen::VectorXd> evaluate_functional(const CmcProblem& problem,
                                                       const Eigen::VectorXd& u);

ConformalSolution minimize(const CmcProblem& problem, const SolverOptions& opts = {});

/// Embedding data (I, B) of a space-like surface. I = base(A., A.) where A is
/// the optional frame operator; the CMC pipeline produces conformal data
/// (A absent, I = e^{2u} h) while the dual construction carries A = b-tilde.
struct EmbeddingData {
  ModelGeometry geometry;
  std::optional<double> H;  // set for constant mean curvature data
  ConeMetric base;
  std::optional<OperatorField> frame;
  OperatorField B;
  OperatorField B0;                // traceless part
  Eigen::VectorXd lambda, mu;      // principal curvatures, lambda <= mu
  // provenance
  QuadraticDifferentialField q;
  Eigen::VectorXd u;

  const MarkedSurface& surface() const { return base.surface(); }
  GramMetric metric() const { return GramMetric{&base, frame ? &*frame : nullptr}; }
  Eigen::VectorXd mean_curvature() const;
  double trace_residual() const;  // max |tr B - 2H| (H set)
};

EmbeddingData build_embedding(const CmcProblem& problem, const ConformalSolution& solution);

enum class CurvatureScheme { ConformalOperator, QuadraticFit, AngleDefect };

struct GaussResidual {
  Eigen::VectorXd field;  // det B - Sec + K_I (NaN at marked vertices)
  double sup = 0.0;       // over non-marked vertices
};

/// A-posteriori Gauss-equation residual. The discrete minimizer satisfies the
/// stiffness/mass route identically, so the default uses the independent
/// two-ring quadratic-fit curvature (angle defect for non-conformal data).
GaussResidual gauss_residual(const EmbeddingData& data,
                             CurvatureScheme scheme = CurvatureScheme::QuadraticFit);

struct PrincipalCurvatureReport {
  Eigen::VectorXd lambda, mu;
  double min_lambda, max_mu;
  double max_umbilicity_defect;          // max |mu - lambda| over all vertices
  double cone_umbilicity_defect;         // max over marked vertices
  double inner_ring_umbilicity_defect;   // max over the innermost ring
  bool bounds_ok;
};

/// Checks the Minkowski bounds 2H < lambda <= H <= mu < 0 (tolerance on the
/// non-strict sides); throws BoundsViolated when they fail.
PrincipalCurvatureReport principal_curvatures(const EmbeddingData& data, double tol = 1e-9);

} // namespace cmcfol
