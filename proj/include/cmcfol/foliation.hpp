#pragma once

#include "cmcfol/flow.hpp"

namespace cmcfol {

struct FoliationLeaf {
  double parameter = 0.0;  // H, or K for dual-transported leaves
  bool is_k_leaf = false;
  std::optional<EmbeddingData> data;   // CMC embedding (always present on success)
  std::optional<KLeafResult> k_leaf;   // set for K-leaves
  double area = 0.0;                   // face-quadrature area of the leaf metric
  double gauss_sup = 0.0;
  double trace_residual = 0.0;
  double min_eig = 0.0, max_eig = 0.0;
  std::pair<double, double> interval{0.0, 0.0};  // admissible flow interval
  std::string error;                             // nonempty if this leaf failed

  bool ok() const { return error.empty(); }
};

/// One solved CMC leaf per grid value; per-leaf failures are recorded, not
/// fatal to the sweep.
std::vector<FoliationLeaf> sweep(const ConeMetric& h, const QuadraticDifferentialField& q,
                                 ModelGeometry geometry, const std::vector<double>& h_grid,
                                 const SolverOptions& opts = {});

/// K-grid sweep: solves the dual CMC problem for each K and transports to the
/// constant-curvature leaf along the duality distance.
std::vector<FoliationLeaf> sweep_k(const ConeMetric& h, const QuadraticDifferentialField& q,
                                   ModelGeometry geometry, const std::vector<double>& k_grid,
                                   const SolverOptions& opts = {});

/// Normal chart g = -dt^2 + I_t of a leaf, sampled on t_grid.
struct SpacetimeChart {
  std::vector<double> t_grid;
  double delta = 0.0;  // half-width of the nondegeneracy interval (-delta, delta)
  std::vector<FlowResult> slices;
  const EmbeddingData* leaf = nullptr;

  /// Full 3x3 chart metric at (slice, vertex); signature (-,+,+) inside the
  /// interval. Not defined at marked vertices (conformal factor diverges).
  Eigen::Matrix3d metric_at(int slice, int v) const;
};

SpacetimeChart spacetime_chart(const FoliationLeaf& leaf, const std::vector<double>& t_grid);

struct GaussBonnetRecord {
  double K = 0.0;
  double area = 0.0;
  double predicted = 0.0;  // 2 pi chi(Sigma,theta) / K
  double rel_error = 0.0;
};

GaussBonnetRecord gauss_bonnet_report(const FoliationLeaf& leaf);

struct OrderingRecord {
  std::vector<double> areas;
  bool areas_monotone = false;
  // umbilic (q = 0) families: measured metric match after flowing by the
  // closed-form leaf separation, one entry per consecutive pair
  std::vector<double> separation_times;
  std::vector<double> separation_match;  // gram mismatch after transport
  // one-sidedness of the transported copy against the later leaf
  std::vector<double> transported_margin;  // min over vertices of (H_t - H_j)
  bool one_sided = false;
};

/// Computable ordering proxies for a sorted sweep: strict area monotonicity in
/// H^2 - Sec, umbilic leaf separations against the closed-form times, and the
/// Jensen one-sidedness of duality-transported copies. Throws OrderingViolated.
OrderingRecord ordering_report(const std::vector<FoliationLeaf>& leaves);

/// Closed-form normal separation between umbilic leaves H_i -> H_j.
double umbilic_separation(Geometry g, double h_i, double h_j);

} // namespace cmcfol
