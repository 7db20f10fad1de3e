#pragma once

#include <array>
#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "cmcfol/errors.hpp"

namespace cmcfol {

using Vec2 = Eigen::Vector2d;

inline constexpr double kPi = 3.14159265358979323846;

struct GradingSpec {
  int levels = 0;
  double min_radius = 1e-3;
};

struct MarkedPoint {
  Vec2 pos;      // flat coordinates inside the fundamental domain
  double theta;  // cone angle, in (0, pi)
  int vertex = -1;
  double beta() const { return theta / (2.0 * kPi) - 1.0; }
};

/// Periodic triangulated flat torus C/(Z + tau Z) with conical marked vertices.
///
/// The boundary identification is carried implicitly: faces reference canonical
/// vertex ids, while `corner` stores the unwrapped flat coordinates of each face,
/// so a face crossing the fundamental domain sees translated copies of its
/// vertices. All per-vertex data lives on the canonical ids.
struct MarkedSurface {
  std::complex<double> tau;
  int base_resolution = 0;
  GradingSpec grading;

  std::vector<Vec2> vertex;                    // canonical flat coordinates
  std::vector<std::array<int, 3>> face;        // ccw vertex ids
  std::vector<std::array<Vec2, 3>> corner;     // unwrapped flat corner coordinates
  std::vector<MarkedPoint> marked;
  std::vector<int> marked_of_vertex;           // -1, or index into `marked`

  int n_vertices() const { return static_cast<int>(vertex.size()); }
  int n_faces() const { return static_cast<int>(face.size()); }
  double domain_area() const { return tau.imag(); }

  bool is_marked_vertex(int v) const { return marked_of_vertex[v] >= 0; }
  /// Corner index (0..2) of the face's unique marked vertex, or -1.
  int face_marked_corner(int f) const;
  bool face_touches_marked(int f) const { return face_marked_corner(f) >= 0; }

  double face_flat_area(int f) const;
  double face_flat_diameter(int f) const;

  /// chi(Sigma, theta) = sum_i beta_i on the torus.
  double chi_theta() const;

  Vec2 to_lattice(const Vec2& xy) const;
  Vec2 to_flat(const Vec2& ab) const;

  /// Distance on the torus between two flat points (minimum over lattice images).
  double periodic_distance(const Vec2& a, const Vec2& b) const;
  /// Distance from a flat point to the nearest marked point; index reported if wanted.
  double distance_to_marked(const Vec2& p, int* which = nullptr) const;

  /// Vertices sorted by periodic distance to marked point `mi` (excluding the
  /// marked vertex itself). Used by ring studies near cone points.
  std::vector<std::pair<double, int>> vertices_by_distance(int mi) const;

  void check_valid() const;  // positive areas, marked vertices present, closed surface
};

MarkedSurface build_torus_mesh(std::complex<double> tau,
                               const std::vector<MarkedPoint>& marked,
                               const GradingSpec& grading,
                               int base_resolution);

} // namespace cmcfol
