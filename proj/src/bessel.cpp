#include <cmath>
#include <numbers>

#include "ksot/errors.hpp"
#include "ksot/kernels.hpp"

namespace ksot {

bool is_half_integer(double nu) {
  if (nu < 0.0) return false;
  const double twice = 2.0 * nu;
  const double rounded = std::round(twice);
  return std::abs(twice - rounded) < 1e-12 && static_cast<long>(rounded) % 2 == 1;
}

bool bessel_in_envelope(double order, double x) {
  return order >= 0.5 && order <= 10.0 && x >= 1e-4 && x <= 50.0;
}

double bessel_k(double order, double x) {
  if (!(x > 0.0)) throw DomainError("bessel_k: argument must be positive");
  const double nu = std::abs(order);  // K_{-nu} = K_nu
  if (is_half_integer(nu)) {
    // K_{p+1/2}(x) = sqrt(pi / 2x) e^{-x} sum_k (p+k)! / (k! (p-k)!) (2x)^{-k}
    const int p = static_cast<int>(std::lround(nu - 0.5));
    double term = 1.0;
    double sum = 1.0;
    for (int k = 1; k <= p; ++k) {
      term *= static_cast<double>((p + k) * (p - k + 1)) / (k * 2.0 * x);
      sum += term;
    }
    return std::sqrt(std::numbers::pi / (2.0 * x)) * std::exp(-x) * sum;
  }
  return std::cyl_bessel_k(nu, x);
}

}  // namespace ksot
