#pragma once

#include <string>

#include <Eigen/Dense>

#include "cmcfol/errors.hpp"

namespace cmcfol {

enum class Geometry { Minkowski, AntiDeSitter, DeSitter };

const char* geometry_name(Geometry g);
Geometry geometry_from_name(const std::string& name);

/// Ambient sectional curvature of the model spacetime.
inline double ambient_curvature(Geometry g) {
  switch (g) {
    case Geometry::Minkowski: return 0.0;
    case Geometry::AntiDeSitter: return -1.0;
    case Geometry::DeSitter: return 1.0;
  }
  return 0.0;
}

/// Admissible constant mean curvatures: Minkowski (-inf,0), AdS (-inf,inf),
/// dS (-inf,-1). Sec - H^2 < 0 holds on each range.
bool mean_curvature_admissible(Geometry g, double h);
std::string mean_curvature_range(Geometry g);

/// Gauss curvatures attained by the K-leaves: Minkowski K<0, AdS K<-1, dS K<0.
bool gauss_curvature_admissible(Geometry g, double k);

struct ModelGeometry {
  Geometry tag = Geometry::Minkowski;
  double sec() const { return ambient_curvature(tag); }
  bool admissible_h(double h) const { return mean_curvature_admissible(tag, h); }
  /// Convexity convention of the CMC / K leaves: Minkowski and dS surfaces are
  /// future-convex (B negative definite); the AdS K-leaf is past-convex.
  bool future_convex_leaves() const { return tag != Geometry::AntiDeSitter; }
};

enum class Chart { Flat, AntiDeSitter, DeSitter, HyperbolicDisk };

/// Diagonal model metric at a chart point, signature (-,+,+):
///   flat  (t,r,phi):  -dt^2 + dr^2 + r^2 dphi^2
///   AdS   (t,phi,rho): -cosh^2(rho) dt^2 + sinh^2(rho) dphi^2 + drho^2
///   dS    (t,phi,alpha): -dt^2 + cosh^2(t)(dphi^2 + sin^2(phi) dalpha^2)
///   H_theta (r,phi): dr^2 + sinh^2(r) dphi^2   (2x2 block, last entry unused)
Eigen::Matrix3d model_chart_metric(Chart chart, double theta, const Eigen::Vector3d& coords);

} // namespace cmcfol
