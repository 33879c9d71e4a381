#include "ksot/sos_witness.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "ksot/errors.hpp"
#include "ksot/linalg.hpp"
#include "ksot/parallel.hpp"
#include "ksot/quadrature.hpp"

namespace ksot {
namespace {

constexpr double kDomainTol = 1e-12;

// Nodes of a regular grid with `per_dim` points per axis, boundaries included.
PointList grid_points(const Domain& dom, int per_dim) {
  const int d = dom.dim();
  std::size_t total = 1;
  for (int k = 0; k < d; ++k) total *= static_cast<std::size_t>(per_dim);
  PointList out;
  out.reserve(total);
  std::vector<int> idx(static_cast<std::size_t>(d), 0);
  for (std::size_t n = 0; n < total; ++n) {
    Point p(d);
    for (int k = 0; k < d; ++k) {
      const auto [lo, hi] = dom.bounds[static_cast<std::size_t>(k)];
      const double t = per_dim == 1 ? 0.5 : static_cast<double>(idx[static_cast<std::size_t>(k)]) / (per_dim - 1);
      p[k] = lo + t * (hi - lo);
    }
    out.push_back(std::move(p));
    for (int k = 0; k < d; ++k) {
      if (++idx[static_cast<std::size_t>(k)] < per_dim) break;
      idx[static_cast<std::size_t>(k)] = 0;
    }
  }
  return out;
}

}  // namespace

void validate_potential(const PotentialSpec& spec, int grid_per_dim) {
  if (!spec.f || !spec.grad_f || !spec.hessian_f || !spec.t_inverse) {
    throw DomainError("potential: every callable must be set");
  }
  if (!(spec.rho > 0.0)) throw DomainError("potential: rho must be positive");
  if (spec.domain_x.dim() == 0 || spec.domain_x.dim() != spec.domain_y.dim()) {
    throw DimensionError("potential: domains must share a positive dimension");
  }
  for (const auto& x : grid_points(spec.domain_x, grid_per_dim)) {
    const double lo = min_eigenvalue(spec.hessian_f(x));
    if (lo < spec.rho * (1.0 - 1e-12)) {
      throw DomainError("potential: Hessian eigenvalue below rho on the validation grid");
    }
  }
}

Eigen::MatrixXd integral_remainder(const PotentialSpec& spec, const Point& x, const Point& z,
                                   int quad_nodes) {
  if (quad_nodes < 2) throw DomainError("remainder: need at least 2 quadrature nodes");
  // The box is convex, so the segment stays inside when both ends do.
  if (!spec.domain_x.contains(x, kDomainTol) || !spec.domain_x.contains(z, kDomainTol)) {
    throw DomainError("remainder: segment leaves the domain");
  }
  const auto rule = gauss_legendre(quad_nodes, 0.0, 1.0);
  const Eigen::VectorXd step = x - z;
  Eigen::MatrixXd r = Eigen::MatrixXd::Zero(x.size(), x.size());
  for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
    const double t = rule.nodes[k];
    r += rule.weights[k] * (1.0 - t) * spec.hessian_f(z + t * step);
  }
  return 0.5 * (r + r.transpose());
}

double conjugate_value(const PotentialSpec& spec, const Point& y) {
  const Point z = spec.t_inverse(y);
  return y.dot(z) - spec.f(z);
}

double fenchel_gap(const PotentialSpec& spec, const Point& x, const Point& y) {
  return spec.f(x) + conjugate_value(spec, y) - x.dot(y);
}

Eigen::VectorXd witness_functions(const PotentialSpec& spec, const Point& x, const Point& y,
                                  int quad_nodes) {
  if (!spec.domain_y.contains(y, kDomainTol)) throw DomainError("witness: y outside domain_y");
  const Point z = spec.t_inverse(y);
  const Eigen::MatrixXd r = integral_remainder(spec, x, z, quad_nodes);
  if (min_eigenvalue(r) <= 0.0) throw DomainError("witness: remainder is not positive definite");
  return sym_sqrt(r) * (x - z);
}

double verify_sos_identity(const PotentialSpec& spec, int grid_per_dim, int quad_nodes, int threads) {
  validate_potential(spec);
  if (grid_per_dim < 1) throw DomainError("verify: grid must have at least one node per axis");
  const PointList xs = grid_points(spec.domain_x, grid_per_dim);
  const PointList ys = grid_points(spec.domain_y, grid_per_dim);
  if (static_cast<double>(xs.size()) * static_cast<double>(ys.size()) > 1e7) {
    throw BudgetError("verify: grid exceeds 1e7 pairs");
  }
  std::vector<double> worst(xs.size(), 0.0);
  parallel_for(xs.size(), threads, [&](std::size_t i) {
    for (const auto& y : ys) {
      const double h = fenchel_gap(spec, xs[i], y);
      const double s = witness_functions(spec, xs[i], y, quad_nodes).squaredNorm();
      worst[i] = std::max(worst[i], std::abs(h - s));
    }
  });
  return *std::max_element(worst.begin(), worst.end());
}

std::function<double(double)> bisection_inverse(std::function<double(double)> map, double lo,
                                                double hi) {
  if (!(lo < hi)) throw DomainError("bisection: empty interval");
  return [map = std::move(map), lo, hi](double target) {
    double a = lo;
    double b = hi;
    const double slack = 1e-12 * (1.0 + std::abs(target));
    const double fa = map(a), fb = map(b);
    if (target < fa - slack || target > fb + slack) throw DomainError("bisection: target outside the range");
    if (target <= fa) return a;
    if (target >= fb) return b;
    for (int it = 0; it < 200 && b - a > 0.0; ++it) {
      const double mid = 0.5 * (a + b);
      if (mid <= a || mid >= b) break;
      if (map(mid) < target) {
        a = mid;
      } else {
        b = mid;
      }
    }
    return 0.5 * (a + b);
  };
}

}  // namespace ksot
