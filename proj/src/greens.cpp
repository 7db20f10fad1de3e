#include "cmcfol/greens.hpp"

#include <cmath>

namespace cmcfol {

namespace {
// theta1(v | tau) / v as a power-series-safe evaluation:
//   theta1(v) = 2 sum_{n>=0} (-1)^n q^{(n+1/2)^2} sin((2n+1) v)
// dividing each term by v through sin(kv)/v keeps the ratio well-conditioned
// near v = 0 where theta1 has its simple zero.
std::complex<double> theta1_over_v(std::complex<double> v, std::complex<double> ipitau, int terms) {
  std::complex<double> sum = 0.0;
  double sign = 1.0;
  for (int n = 0; n < terms; ++n) {
    double e = (n + 0.5) * (n + 0.5);
    std::complex<double> qp = std::exp(ipitau * e);  // q^{(n+1/2)^2} on the right branch
    std::complex<double> k(2 * n + 1, 0.0);
    std::complex<double> sinc = (std::abs(v) < 1e-12) ? k : std::sin(k * v) / v;
    sum += sign * qp * sinc;
    sign = -sign;
  }
  return 2.0 * sum;
}
} // namespace

PeriodicGreens::PeriodicGreens(std::complex<double> tau, int terms) : tau_(tau), terms_(terms) {
  if (!(tau.imag() > 0.0)) fail(ErrorCode::DegenerateLattice, "Im tau must be positive");
  if (terms < 1) fail(ErrorCode::TruncationTooLow, "need at least one series term");
  ipitau_ = std::complex<double>(0.0, kPi) * tau_;

  // tail bound at the worst reduced argument |Im v| <= pi Im(tau)/2
  double lq = -kPi * tau_.imag();
  double worst = 0.0;
  for (int n = terms; n < terms + 4; ++n)
    worst += std::exp(lq * (n + 0.5) * (n + 0.5) + (2 * n + 1) * kPi * tau_.imag() / 2.0);
  if (worst > 1e-13)
    fail(ErrorCode::TruncationTooLow,
         "theta series tail " + std::to_string(worst) + " with " + std::to_string(terms) + " terms");

  std::complex<double> d0 = 0.0;
  double sign = 1.0;
  for (int n = 0; n < terms; ++n) {
    d0 += sign * std::exp(ipitau_ * ((n + 0.5) * (n + 0.5))) * std::complex<double>(2 * n + 1, 0.0);
    sign = -sign;
  }
  theta1_prime0_ = 2.0 * d0;
}

std::complex<double> PeriodicGreens::reduce(const Vec2& z, const Vec2& p) const {
  double im = tau_.imag(), re = tau_.real();
  Vec2 d = z - p;
  double b = d.y() / im;
  double a = d.x() - b * re;
  a -= std::floor(a + 0.5);
  b -= std::floor(b + 0.5);
  return std::complex<double>(a + b * re, b * im);
}

double PeriodicGreens::log_theta_ratio(std::complex<double> w) const {
  std::complex<double> v = kPi * w;
  std::complex<double> ratio = theta1_over_v(v, ipitau_, terms_) / theta1_prime0_;
  return std::log(std::abs(ratio));
}

double PeriodicGreens::value(const Vec2& z, const Vec2& p) const {
  std::complex<double> w = reduce(z, p);
  double r = std::abs(w);
  if (r == 0.0) return -std::numeric_limits<double>::infinity();
  return log_theta_ratio(w) + std::log(r) - kPi * w.imag() * w.imag() / tau_.imag();
}

double PeriodicGreens::regular_part(const Vec2& z, const Vec2& p) const {
  std::complex<double> w = reduce(z, p);
  return log_theta_ratio(w) - kPi * w.imag() * w.imag() / tau_.imag();
}

double PeriodicGreens::fourier_partial_sum(const Vec2& z, const Vec2& p, int modes) const {
  double im = tau_.imag(), re = tau_.real();
  Vec2 d = z - p;
  // dual basis of the lattice (1, tau)
  Vec2 b1(1.0, -re / im), b2(0.0, 1.0 / im);
  double sum = 0.0;
  for (int m = -modes; m <= modes; ++m)
    for (int n = -modes; n <= modes; ++n) {
      if (m == 0 && n == 0) continue;
      Vec2 k = 2.0 * kPi * (m * b1 + n * b2);
      sum += std::cos(k.dot(d)) / k.squaredNorm();
    }
  return -(2.0 * kPi / im) * sum;
}

} // namespace cmcfol
