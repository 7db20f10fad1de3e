#pragma once

#include "cmcfol/flow.hpp"

namespace cmcfol {

enum class HopfSource { Gauss, Projection, Left, Right };

/// Quadratic-differential datum of one of the harmonic identity maps attached
/// to a CMC surface, as a per-face coefficient field in the flat chart.
struct HopfDatum {
  HopfSource source = HopfSource::Gauss;
  std::vector<Complex> face_coeff;
  Eigen::VectorXd energy_density;  // per vertex
  double holo_residual = 0.0;
};

/// Hopf differential of the Gauss map (HIB0 + i J HIB0) or of the normal
/// projection to the dual K-leaf (the opposite differential).
HopfDatum hopf_from_embedding(const EmbeddingData& data, HopfSource which);

/// L2 norm of the discrete dbar of a per-face field: least-squares gradient
/// from the differences to the (up to) three edge-neighbors, cone-incident
/// faces excluded from the sum.
double holomorphicity_residual_field(const std::vector<Complex>& face_field,
                                     const MarkedSurface& surface);
double holomorphicity_residual(const HopfDatum& datum, const MarkedSurface& surface);

struct LandslidePair {
  MetricData h_left, h_right;      // I((E+JB)., (E+JB).) and I((E-JB)., (E-JB).)
  double min_composite_det = 0.0;  // min over vertices of det(E+-JB)
  double alpha = 0.0;              // -arctan(H) + pi/2, in (0, pi)
  Complex ratio_mean = 0.0;        // area-weighted mean of the per-face Hopf ratio
  double ratio_max_dev = 0.0;      // max per-face deviation from the mean
  Complex ratio_expected = 0.0;    // (H+i)/(H-i) = e^{2 i alpha}
};

/// Left/right hyperbolic metrics of an AdS surface (no Hopf ratio computed).
LandslidePair left_right_metrics(const EmbeddingData& data);

/// Full landslide certificate: left/right metrics plus the per-face ratio of
/// the two projection Hopf differentials against (H+i)/(H-i).
LandslidePair landslide_check(const EmbeddingData& data);

struct MinimalLagrangianCertificate {
  OperatorField b;  // (2HE - B) B^{-1}, normalized to det 1
  double det_residual = 0.0;      // sup |det b - 1| before normalization
  double codazzi_res = 0.0;       // w.r.t. the source metric III
  bool positive = false;          // both eigenvalues positive everywhere
  double cone_limit_residual = 0.0;  // max |eigenvalue - 1| on the innermost rings
  std::vector<std::pair<double, double>> ring_deviation;  // (radius, max |eig-1|)
};

/// Certifies the minimal-Lagrangian morphism between the third fundamental
/// form and the dual K-leaf metric of a Minkowski CMC surface.
MinimalLagrangianCertificate minimal_lagrangian_certificate(const EmbeddingData& data);

} // namespace cmcfol
