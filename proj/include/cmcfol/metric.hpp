#pragma once

#include <functional>
#include <memory>

#include <Eigen/Sparse>

#include "cmcfol/fields.hpp"
#include "cmcfol/greens.hpp"
#include "cmcfol/mesh.hpp"

namespace cmcfol {

using SparseMat = Eigen::SparseMatrix<double>;

/// Per-surface cache of everything tied to the flat cone background
/// g0 = e^{2 phi0} |dz|^2 with phi0 = sum_i beta_i G(z, p_i):
/// the Green's evaluators, the flat cotangent stiffness (exact for every
/// conformal metric in dimension two), flat and weighted lumped masses, and
/// the vertex stars used by stencil-based curvature estimates.
class ConeBackground {
public:
  ConeBackground(std::shared_ptr<const MarkedSurface> surface, int truncation);

  const MarkedSurface& surface() const { return *surface_; }
  std::shared_ptr<const MarkedSurface> surface_ptr() const { return surface_; }
  const PeriodicGreens& greens() const { return greens_; }

  const SparseMat& stiffness() const { return stiffness_; }
  const Eigen::VectorXd& flat_mass() const { return flat_mass_; }
  const Eigen::VectorXd& mass0() const { return mass0_; }

  /// phi0 at vertices; +infinity at marked vertices (beta < 0).
  const Eigen::VectorXd& phi0() const { return phi0_; }
  /// Regular part phi0 - beta_mi log|. - p_mi| evaluated at marked vertex mi.
  double phi0_regular(int mi) const { return phi0_reg_[mi]; }

  double phi0_at(const Vec2& x) const;
  /// phi0 with marked point mi's own log term removed (smooth across p_mi).
  double phi0_at_excluding(const Vec2& x, int mi) const;

  /// 2*pi*chi(Sigma,theta)/|T|: the constant curvature density of g0 in flat
  /// coordinates; the pointwise curvature is e^{-2 phi0} times this.
  double flat_curvature_density() const { return flat_density_; }

  /// Integral over face f of e^{2 phi0} * g, with the r^{2 beta} weight of a
  /// marked corner integrated by the exact radial substitution. `g` receives
  /// the flat point and the barycentric hat values.
  double face_weighted_integral(int f, const std::function<double(const Vec2&, const std::array<double, 3>&)>& g) const;

  /// Two-ring stencil of a vertex: (vertex id, position relative to v).
  const std::vector<std::pair<int, Vec2>>& star2(int v) const { return star2_[v]; }

private:
  std::shared_ptr<const MarkedSurface> surface_;
  PeriodicGreens greens_;
  SparseMat stiffness_;
  Eigen::VectorXd flat_mass_, mass0_, phi0_, phi0_reg_;
  double flat_density_ = 0.0;
  std::vector<std::vector<std::pair<int, Vec2>>> star2_;

  void build_stars();
};

/// Conformal metric e^{2(phi0 + smooth)} |dz|^2 on the marked torus.
/// `curvature_load` carries the integrated curvature per vertex cell; it is
/// transported exactly under discrete conformal change (kappa += S * extra),
/// which preserves the Gauss-Bonnet closure to rounding.
class ConeMetric {
public:
  ConeMetric() = default;  // empty; assign before use
  ConeMetric(std::shared_ptr<const ConeBackground> bg, Eigen::VectorXd smooth, Eigen::VectorXd kappa);

  static ConeMetric background(std::shared_ptr<const ConeBackground> bg);
  ConeMetric scaled(const Eigen::VectorXd& extra) const;

  const ConeBackground& bg() const { return *bg_; }
  std::shared_ptr<const ConeBackground> bg_ptr() const { return bg_; }
  const MarkedSurface& surface() const { return bg_->surface(); }

  const Eigen::VectorXd& smooth() const { return smooth_; }
  const Eigen::VectorXd& mass() const { return mass_; }
  const Eigen::VectorXd& curvature_load() const { return kappa_; }
  Eigen::VectorXd curvature_field() const { return kappa_.cwiseQuotient(mass_); }

  double area_lumped() const { return mass_.sum(); }

  /// Full conformal exponent w = phi0 + smooth; +infinity at marked vertices.
  double exponent(int v) const { return bg_->phi0()[v] + smooth_[v]; }
  /// e^{k w} at a vertex; exactly 0 at marked vertices for k < 0.
  double exp_kw(int v, double k) const;

  /// Max |K + 1| over non-marked vertices (mass-averaged curvature).
  double hyperbolic_residual() const;

private:
  std::shared_ptr<const ConeBackground> bg_;
  Eigen::VectorXd smooth_, mass_, kappa_;
};

ConeMetric background_factor(std::shared_ptr<const MarkedSurface> surface, int truncation = 16);

struct DiscreteOperators {
  const SparseMat& stiffness;
  const Eigen::VectorXd& mass;
};
DiscreteOperators laplacian_and_mass(const MarkedSurface& surface, const ConeMetric& metric);

/// Curvature of e^{2 extra} * metric through the discrete conformal change
/// (stiffness/mass route).
Eigen::VectorXd discrete_curvature(const ConeMetric& metric, const Eigen::VectorXd& extra);

/// Metric e^{2(phi0+smooth)} * (A^T A) given per-vertex operators A; A = E
/// (op == nullptr) recovers the conformal case. This is how flowed metrics
/// I_t = I((E-tB).,(E-tB).) and the landslide metrics are represented.
struct GramMetric {
  const ConeMetric* base = nullptr;
  const OperatorField* op = nullptr;  // nullable

  Mat2 op_at(int v) const { return op ? op->m[v] : Mat2::Identity(); }
};

/// Arc lengths of all face sides (indexed 3*f + e, side e joins corners e,e+1),
/// with the r^beta weight at marked endpoints integrated by substitution.
Eigen::VectorXd metric_edge_lengths(const GramMetric& g);

/// Independent curvature estimate: angle defect of the piecewise-flat metric
/// with the exact side lengths above, divided by one third of the incident
/// metric areas. Marked vertices use their cone angle as the flat reference.
Eigen::VectorXd angle_defect_curvature(const GramMetric& g);

/// Independent curvature estimate for conformal metrics: the flat Laplacian of
/// the smooth exponent from a two-ring least-squares quadratic fit, with the
/// singular part handled analytically (its flat Laplacian is the constant
/// curvature density). NaN at marked vertices.
Eigen::VectorXd quadratic_fit_curvature(const ConeMetric& metric);

/// Face-quadrature area of a Gram metric (reports use this; solver internals
/// use the lumped masses).
double area_quadrature(const GramMetric& g);

OperatorField operator_from_quaddiff(const ConeMetric& metric, const QuadraticDifferentialField& q);

/// L2 norm of the discrete exterior covariant derivative d^nabla(op) over faces
/// not incident to marked vertices, for a conformal metric.
double codazzi_residual(const ConeMetric& metric, const OperatorField& op);

/// Same for a general Gram metric (Christoffels from P1 gradients of the Gram).
double codazzi_residual_gram(const GramMetric& g, const OperatorField& op);

} // namespace cmcfol
