#pragma once

#include <functional>

#include <Eigen/Dense>

#include "ksot/geometry.hpp"
#include "ksot/types.hpp"

namespace ksot {

/// Strongly convex potential f on X with Brenier map T = grad f and its inverse.
struct PotentialSpec {
  std::function<double(const Point&)> f;
  std::function<Eigen::VectorXd(const Point&)> grad_f;
  std::function<Eigen::MatrixXd(const Point&)> hessian_f;
  std::function<Point(const Point&)> t_inverse;
  Domain domain_x;
  Domain domain_y;
  double rho = 0.0;  // lower bound on the Hessian eigenvalues
};

/// Checks H_f >= rho I on a grid over domain_x. Throws DomainError otherwise.
void validate_potential(const PotentialSpec& spec, int grid_per_dim = 9);

/// R(x, z) = int_0^1 (1 - t) H_f(z + t (x - z)) dt, so that
/// f(x) - f(z) - grad f(z)^T (x - z) = (x - z)^T R (x - z).
Eigen::MatrixXd integral_remainder(const PotentialSpec& spec, const Point& x, const Point& z,
                                   int quad_nodes);

/// f*(y) = y^T T^{-1}(y) - f(T^{-1}(y)).
double conjugate_value(const PotentialSpec& spec, const Point& y);

/// h(x, y) = f(x) + f*(y) - x^T y.
double fenchel_gap(const PotentialSpec& spec, const Point& x, const Point& y);

/// w(x, y) = sqrt(R(x, z)) (x - z) with z = T^{-1}(y); sum_i w_i^2 = h(x, y).
Eigen::VectorXd witness_functions(const PotentialSpec& spec, const Point& x, const Point& y,
                                  int quad_nodes);

/// max |h - sum_i w_i^2| over a grid_per_dim^(2d) grid on domain_x x domain_y.
double verify_sos_identity(const PotentialSpec& spec, int grid_per_dim, int quad_nodes,
                           int threads = 1);

/// Inverse of a continuous increasing map on [lo, hi], by bisection. Targets
/// outside [map(lo), map(hi)] throw DomainError.
std::function<double(double)> bisection_inverse(std::function<double(double)> map, double lo,
                                                double hi);

}  // namespace ksot
