#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "ksot/types.hpp"

namespace ksot {

/// Modified Bessel function of the second kind K_nu(x), x > 0.
///
/// Half-integer orders use the exact finite closed form; other orders are
/// delegated to std::cyl_bessel_k (Temme series for small x, Steed's continued
/// fraction beyond). Relative accuracy is better than 1e-10 for
/// 0.5 <= nu <= 10 and 1e-4 <= x <= 50; see bessel_in_envelope().
double bessel_k(double order, double x);

/// True when (order, x) lies in the range where bessel_k is validated.
bool bessel_in_envelope(double order, double x);

/// True when `nu` is p + 1/2 for a nonnegative integer p.
bool is_half_integer(double nu);

/// Coefficients (in increasing powers of r) of the polynomial P with
/// r^nu K_nu(r) 2^{1-nu} / Gamma(nu) = e^{-r} P(r) for nu = p + 1/2; P(0) = 1.
std::vector<double> half_integer_profile_poly(int p);

struct SobolevFamily {
  double s;  // smoothness, must exceed d / 2
  int d;     // ambient dimension of the points
};

struct GaussianFamily {
  double sigma_sq;  // k(z, z') = exp(-|z - z'|^2 / (2 sigma_sq))
};

/// Radial kernel description. Distances are divided by `lengthscale` before
/// the profile is evaluated.
struct KernelSpec {
  std::variant<SobolevFamily, GaussianFamily> family;
  double lengthscale = 1.0;

  static KernelSpec sobolev(double s, int d, double lengthscale = 1.0);
  static KernelSpec gaussian(double sigma_sq, double lengthscale = 1.0);

  bool is_sobolev() const { return std::holds_alternative<SobolevFamily>(family); }
  bool is_gaussian() const { return std::holds_alternative<GaussianFamily>(family); }

  /// Required point dimension, or nullopt when any dimension is accepted.
  std::optional<int> dimension() const;

  /// Bessel order s - d/2 of a Sobolev kernel.
  double matern_order() const;

  /// Kernel value as a function of the (unscaled) Euclidean distance r >= 0.
  double profile(double r) const;

  /// d/dr of profile(r). Only defined where the profile is differentiable.
  double profile_derivative(double r) const;

  /// Whether kernel_gradient uses the analytic derivative.
  bool has_analytic_gradient() const;

  std::string describe() const;
};

/// k(z, z2). Exactly 1 on the diagonal for both families.
double eval_kernel(const KernelSpec& spec, const Point& z, const Point& z2);

/// Gradient of k(z, z2) with respect to z.
Eigen::VectorXd kernel_gradient(const KernelSpec& spec, const Point& z, const Point& z2);

/// Gram matrix with entries k(a_i, a_j).
struct GramMatrix {
  PointList points;
  Eigen::MatrixXd entries;
  KernelSpec spec;
};

GramMatrix gram(const KernelSpec& spec, const PointList& points);

/// Rectangular cross-Gram with entries k(a_i, b_j).
Eigen::MatrixXd cross_gram(const KernelSpec& spec, const PointList& a, const PointList& b);

/// Vector (k(a_1, p), ..., k(a_n, p)).
Eigen::VectorXd kernel_column(const KernelSpec& spec, const PointList& anchors, const Point& p);

}  // namespace ksot
