#pragma once

#include <vector>

namespace ksot {

/// Nodes and weights of a one-dimensional quadrature rule.
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// n-point Gauss-Legendre rule on [-1, 1].
QuadratureRule gauss_legendre(int n);

/// Gauss-Legendre rule with `n` points mapped to [a, b].
QuadratureRule gauss_legendre(int n, double a, double b);

/// Composite rule: `panels` equal sub-intervals of [a, b], each with `n` points.
QuadratureRule composite_gauss_legendre(int n, int panels, double a, double b);

}  // namespace ksot
