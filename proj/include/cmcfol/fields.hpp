#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "cmcfol/mesh.hpp"

namespace cmcfol {

using Mat2 = Eigen::Matrix2d;
using Complex = std::complex<double>;

/// Rotation by +pi/2 in the oriented (flat or conformal orthonormal) frame.
inline Mat2 rot_j() {
  Mat2 j;
  j << 0.0, -1.0, 1.0, 0.0;
  return j;
}

/// Matrix of the bilinear form Re(f dz^2) in flat coordinates.
inline Mat2 requad_matrix(Complex f) {
  Mat2 m;
  m << f.real(), -f.imag(), -f.imag(), -f.real();
  return m;
}

/// Coefficient f with T = Re(f dz^2), for symmetric traceless T.
inline Complex quad_coeff(const Mat2& t) { return Complex(t(0, 0), -t(0, 1)); }

/// Eigenvalues of a symmetric 2x2, returned (lo, hi).
inline std::pair<double, double> sym_eigenvalues(const Mat2& m) {
  double mean = 0.5 * (m(0, 0) + m(1, 1));
  double r = std::hypot(0.5 * (m(0, 0) - m(1, 1)), 0.5 * (m(0, 1) + m(1, 0)));
  return {mean - r, mean + r};
}

/// Per-vertex field of tangent-bundle operators. All metrics in play are
/// conformal to the flat chart, so a (1,1)-tensor has the same matrix in the
/// flat frame and in any conformal orthonormal frame; matrices are stored once
/// in flat coordinates.
struct OperatorField {
  std::vector<Mat2> m;

  int size() const { return static_cast<int>(m.size()); }
  static OperatorField identity(int n) {
    OperatorField f;
    f.m.assign(n, Mat2::Identity());
    return f;
  }
  static OperatorField zero(int n) {
    OperatorField f;
    f.m.assign(n, Mat2::Zero());
    return f;
  }
  double trace(int v) const { return m[v].trace(); }
  double det(int v) const { return m[v].determinant(); }
  std::pair<double, double> eigenvalues(int v) const { return sym_eigenvalues(m[v]); }
  double max_asymmetry() const {
    double a = 0.0;
    for (const Mat2& x : m) a = std::max(a, std::abs(x(0, 1) - x(1, 0)));
    return a;
  }
};

/// Doubly periodic holomorphic quadratic differential c dz^2. On the torus with
/// one marked point this global constant exhausts the admissible space: an
/// elliptic function with a single simple pole cannot exist.
struct QuadraticDifferentialField {
  Complex c = 0.0;
  Complex at_face(int) const { return c; }
  Complex at_vertex(int) const { return c; }
  bool is_zero() const { return c == 0.0; }
};

QuadraticDifferentialField quad_diff_field(const MarkedSurface& surface, Complex c);

} // namespace cmcfol
