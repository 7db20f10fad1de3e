#pragma once

#include <complex>

#include "cmcfol/mesh.hpp"

namespace cmcfol {

/// Green's function of the flat torus C/(Z + tau Z):
///
///   Laplacian G(., p) = 2 pi (delta_p - 1/|T|),   |T| = Im tau,
///
/// normalized so that G(z, p) - log|z - p| -> 0 as z -> p. The k-space lattice
/// sum -(2 pi/|T|) sum_{k != 0} e^{i k (x-p)} / |k|^2 is summed in closed form
/// through the Jacobi theta function, which converges like |q|^{n^2} with
/// q = e^{i pi tau}; `terms` controls the series length and is validated at
/// construction (thin tori need more terms).
class PeriodicGreens {
public:
  explicit PeriodicGreens(std::complex<double> tau, int terms = 16);

  double value(const Vec2& z, const Vec2& p) const;
  /// G(z,p) - log(nearest-image distance); finite for all z including z = p.
  double regular_part(const Vec2& z, const Vec2& p) const;
  /// Reference truncated k-space sum with |m|,|n| <= modes (slowly convergent).
  double fourier_partial_sum(const Vec2& z, const Vec2& p, int modes) const;

  std::complex<double> tau() const { return tau_; }
  int terms() const { return terms_; }

private:
  std::complex<double> tau_;
  std::complex<double> ipitau_;     // i pi tau, the log of the nome
  std::complex<double> theta1_prime0_;
  int terms_;

  // log|theta1(pi w)/(pi theta1'(0) w)| for w reduced to the centered cell
  double log_theta_ratio(std::complex<double> w) const;
  std::complex<double> reduce(const Vec2& z, const Vec2& p) const;
};

} // namespace cmcfol
