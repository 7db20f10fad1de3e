#include "cmcfol/models.hpp"

#include <cmath>

#include "cmcfol/mesh.hpp"

namespace cmcfol {

const char* geometry_name(Geometry g) {
  switch (g) {
    case Geometry::Minkowski: return "minkowski";
    case Geometry::AntiDeSitter: return "ads";
    case Geometry::DeSitter: return "ds";
  }
  return "?";
}

Geometry geometry_from_name(const std::string& name) {
  if (name == "minkowski" || name == "mink" || name == "flat") return Geometry::Minkowski;
  if (name == "ads" || name == "anti-de-sitter" || name == "antidesitter") return Geometry::AntiDeSitter;
  if (name == "ds" || name == "de-sitter" || name == "desitter") return Geometry::DeSitter;
  fail(ErrorCode::ValidationError, "unknown geometry '" + name + "'");
}

bool mean_curvature_admissible(Geometry g, double h) {
  switch (g) {
    case Geometry::Minkowski: return h < 0.0;
    case Geometry::AntiDeSitter: return std::isfinite(h);
    case Geometry::DeSitter: return h < -1.0;
  }
  return false;
}

std::string mean_curvature_range(Geometry g) {
  switch (g) {
    case Geometry::Minkowski: return "H in (-inf, 0)";
    case Geometry::AntiDeSitter: return "H in (-inf, inf)";
    case Geometry::DeSitter: return "H in (-inf, -1)";
  }
  return "";
}

bool gauss_curvature_admissible(Geometry g, double k) {
  switch (g) {
    case Geometry::Minkowski: return k < 0.0;
    case Geometry::AntiDeSitter: return k < -1.0;
    case Geometry::DeSitter: return k < 0.0;
  }
  return false;
}

Eigen::Matrix3d model_chart_metric(Chart chart, double theta, const Eigen::Vector3d& c) {
  if (!(theta > 0.0)) fail(ErrorCode::ChartDomain, "total angle must be positive");
  Eigen::Matrix3d g = Eigen::Matrix3d::Zero();
  switch (chart) {
    case Chart::Flat: {
      double r = c[1];
      if (r < 0.0) fail(ErrorCode::ChartDomain, "r must be nonnegative");
      g.diagonal() << -1.0, 1.0, r * r;
      return g;
    }
    case Chart::AntiDeSitter: {
      double rho = c[2];
      if (rho < 0.0) fail(ErrorCode::ChartDomain, "rho must be nonnegative");
      g.diagonal() << -std::cosh(rho) * std::cosh(rho), std::sinh(rho) * std::sinh(rho), 1.0;
      return g;
    }
    case Chart::DeSitter: {
      double t = c[0], phi = c[1];
      if (phi < 0.0 || phi > kPi) fail(ErrorCode::ChartDomain, "phi must lie in [0, pi]");
      double ch = std::cosh(t);
      g.diagonal() << -1.0, ch * ch, ch * ch * std::sin(phi) * std::sin(phi);
      return g;
    }
    case Chart::HyperbolicDisk: {
      double r = c[0];
      if (r < 0.0) fail(ErrorCode::ChartDomain, "r must be nonnegative");
      g.diagonal() << 1.0, std::sinh(r) * std::sinh(r), 0.0;
      return g;
    }
  }
  fail(ErrorCode::ChartDomain, "unknown chart");
}

} // namespace cmcfol
