#pragma once

#include "cmcfol/solver.hpp"

namespace cmcfol {

/// Safety margin on flow denominators; a vertex inside the margin invalidates
/// the whole-surface flow.
inline constexpr double kFlowEps = 1e-9;

/// Closed-form evolution of a principal-curvature pair under the normal flow
/// (future-positive t):
///   Minkowski: k_t = k/(1 - k t)
///   AdS:       k_t = (k + tan t)/(1 - k tan t)
///   dS:        k_t = (k - tanh t)/(1 - k tanh t)
std::pair<double, double> flow_point(double lambda, double mu, double t, ModelGeometry geometry);

/// Equidistant-surface data at normal time t: I_t = base(A., A.), shape
/// operator B_t, principal curvature fields. AdS is computed in the per-vertex
/// eigenframe of B; agreement with the cos/sin matrix formula is a tested
/// invariant.
struct FlowResult {
  double t = 0.0;
  ModelGeometry geometry;
  ConeMetric base;
  OperatorField A;  // frame operator of I_t over `base`
  OperatorField B_t;
  Eigen::VectorXd lambda_t, mu_t;
  std::vector<bool> valid;

  GramMetric metric() const { return GramMetric{&base, &A}; }
  /// Gauss-equation curvature Sec - det(B_t), exact per-vertex algebra.
  Eigen::VectorXd gauss_curvature() const;
};

FlowResult flow_embedding(const EmbeddingData& data, double t);

/// Re-packages a flowed surface as embedding data so it can be flowed again
/// (or charted). H is set only when the trace field is constant.
EmbeddingData embedding_from_flow(const FlowResult& flow, const QuadraticDifferentialField& q);

/// Largest open interval of admissible flow times around 0, shrunk by the
/// safety margin. AdS is also limited by the tan poles at +-pi/2.
std::pair<double, double> admissible_interval(const EmbeddingData& data);

/// CMC <-> K duality in closed form. Input is H for Minkowski (CMC -> K-leaf)
/// and K for AdS/dS (K-leaf -> CMC), per the flow lemmas:
///   Minkowski: d(H) = 1/(2H) < 0,              f(H) = -4 H^2
///   AdS:       d(K) = arctan(sqrt(1/(-1-K))),  f(K) = (-2-K)/(2 sqrt(-1-K))
///   dS:        d(K) = arctanh(sqrt(1/(1-K))),  f(K) = (K-2)/(2 sqrt(1-K))
/// The Minkowski and dS distances are signed flow times toward the partner
/// leaf; the AdS partner CMC leaf lies at flow time -d(K) (in the past).
struct DualityMap {
  Geometry geometry = Geometry::Minkowski;
  bool in_domain(double x) const;
  std::string domain() const;
};

std::pair<double, double> duality_eval(const DualityMap& map, double x);
inline std::pair<double, double> duality_eval(ModelGeometry g, double x) {
  return duality_eval(DualityMap{g.tag}, x);
}

/// K of the leaf dual to the CMC value H (inverse of the duality value map,
/// branch pinned by the geometry's admissible ranges).
double duality_inverse_k(Geometry g, double H);

struct KLeafResult {
  FlowResult flow;
  double K = 0.0;               // target constant curvature
  double flow_time = 0.0;
  double max_gauss_deviation = 0.0;  // sup |Sec - det B_t - K| over vertices
};

/// Flows CMC data by the duality distance and certifies the constant-curvature
/// leaf; checks the convexity convention of the geometry.
KLeafResult k_leaf_from_cmc(const EmbeddingData& data, double tol = 1e-9);

/// Lower bound on |L| so the dual construction stays below curvature bound C:
/// L < -sqrt(1/C - inf det b0~).
double dual_embedding_l_bound(const ConeMetric& h_tilde, const QuadraticDifferentialField& q_tilde,
                              double C);

/// Convex surface from dual data: b~ = h~^{-1} Re q~ + L E, B = b~^{-1},
/// I = h~(b~., b~.). B comes out negative definite with -C < K_I < 0, and the
/// third fundamental form recovers h~ to rounding.
EmbeddingData dual_embedding(const ConeMetric& h_tilde, const QuadraticDifferentialField& q_tilde,
                             double L);

struct MetricData {
  ConeMetric base;
  OperatorField comp;
  GramMetric view() const { return GramMetric{&base, &comp}; }
};

/// Third fundamental form III(u,v) = I(B u, B v) as conformal-plus-operator data.
MetricData third_form(const EmbeddingData& data);

/// Max relative pointwise difference of two Gram metrics over non-marked
/// vertices (metrics must share a surface and background).
double gram_max_rel_diff(const GramMetric& a, const GramMetric& b);

} // namespace cmcfol
