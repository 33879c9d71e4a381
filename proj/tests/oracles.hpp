#pragma once

#include <cmath>
#include <limits>
#include <random>

#include <Eigen/Dense>

#include "ksot/embeddings.hpp"
#include "ksot/linalg.hpp"
#include "ksot/ot_estimator.hpp"
#include "ksot/sdp_solver.hpp"

namespace ksot::testing {

inline Eigen::MatrixXd random_psd(std::mt19937_64& rng, int l, double scale = 1.0) {
  std::normal_distribution<double> n01;
  Eigen::MatrixXd a(l, l);
  for (int i = 0; i < l; ++i)
    for (int j = 0; j < l; ++j) a(i, j) = n01(rng);
  Eigen::MatrixXd k = scale * a * a.transpose() / l;
  k.diagonal().array() += 0.05 * scale;
  return k;
}

/// Synthetic dual data with random PSD matrices and a random linear term.
inline DualData random_dual(std::mt19937_64& rng, int l) {
  std::normal_distribution<double> n01;
  std::uniform_real_distribution<double> u01;
  DualData d;
  d.lambda1 = 0.05 + 0.95 * u01(rng);
  d.lambda2 = 0.1 + 0.9 * u01(rng);
  d.kx = random_psd(rng, l);
  d.ky = random_psd(rng, l);
  d.Q = d.kx + d.ky;
  d.phi_factor = cholesky_psd(random_psd(rng, l));
  d.w_mu_at_fill = Eigen::VectorXd::NullaryExpr(l, [&] { return n01(rng); });
  d.w_nu_at_fill = Eigen::VectorXd::NullaryExpr(l, [&] { return n01(rng); });
  d.cost_values = Eigen::VectorXd::NullaryExpr(l, [&] { return u01(rng); });
  d.z = d.w_mu_at_fill + d.w_nu_at_fill - 2.0 * d.lambda2 * d.cost_values;
  d.q_sq = 1.0 + u01(rng);
  return d;
}

/// Minimum of F over feasible gamma (l = 1 or 2) by repeated zoomed grid scans.
/// l = 2 only. det M(g) = lambda1^2 + lambda1 (g0 p + g1 q) + g0 g1 c is
/// linear in g1, so the PSD boundary is traced exactly by g0. Zoomed 1D scan.
inline double boundary_oracle(const DualData& d, double radius) {
  const BarrierProblem prob = d.barrier_problem();
  const Eigen::VectorXd a = d.Phi().col(0), b = d.Phi().col(1);
  const double lam = d.lambda1, p = a.squaredNorm(), q = b.squaredNorm();
  const double c = p * q - a.dot(b) * a.dot(b);
  const auto value = [&](double g0) {
    const double denom = lam * q + g0 * c;
    if (denom == 0.0) return std::numeric_limits<double>::infinity();
    Eigen::VectorXd g(2);
    g << g0, -(lam * lam + lam * g0 * p) / denom;
    // Other eigenvalue equals the trace on the boundary.
    if (2.0 * lam + g[0] * p + g[1] * q < 0.0) return std::numeric_limits<double>::infinity();
    return prob.objective(g);
  };
  double centre = 0.0, best = std::numeric_limits<double>::infinity();
  constexpr int kSteps = 4000;
  for (int level = 0; level < 12; ++level) {
    const double h = 2.0 * radius / kSteps;
    double best_g0 = centre;
    for (int i = 0; i <= kSteps; ++i) {
      const double g0 = centre - radius + i * h;
      const double f = value(g0);
      if (f < best) {
        best = f;
        best_g0 = g0;
      }
    }
    centre = best_g0;
    radius = 4.0 * h;
  }
  return best;
}

inline double grid_oracle(const DualData& d) {
  const BarrierProblem p = d.barrier_problem();
  const int l = static_cast<int>(d.size());
  const Eigen::VectorXd free_opt = d.Q.ldlt().solve(d.z);
  double radius = free_opt.cwiseAbs().maxCoeff() + 10.0 * d.lambda1 + 1.0;
  Eigen::VectorXd centre = Eigen::VectorXd::Zero(l);
  double best = std::numeric_limits<double>::infinity();
  Eigen::VectorXd best_g = centre;
  constexpr int kSteps = 200;
  for (int level = 0; level < 14; ++level) {
    const double h = 2.0 * radius / kSteps;
    const int outer = l == 2 ? kSteps : 0;
    for (int i = 0; i <= kSteps; ++i) {
      for (int j = 0; j <= outer; ++j) {
        Eigen::VectorXd g = centre;
        g[0] += -radius + i * h;
        if (l == 2) g[1] += -radius + j * h;
        if (check_feasible(g, d.Phi(), d.lambda1) < 0.0) continue;
        const double f = p.objective(g);
        if (f < best) {
          best = f;
          best_g = g;
        }
      }
    }
    centre = best_g;
    radius = 4.0 * h;
  }
  if (l == 2) best = std::min(best, boundary_oracle(d, free_opt.cwiseAbs().maxCoeff() + 10.0 * d.lambda1 + 1.0));
  return best;
}

/// Uniform on [0, 1] against uniform on [shift, 1 + shift], exact embeddings,
/// Sobol fill set.
inline OtProblem translation_problem(std::size_t l, const KernelSpec& marginal, const KernelSpec& joint,
                                     double shift = 0.3) {
  const Domain dx = Domain::cube(1, 0.0, 1.0);
  const Domain dy = Domain::cube(1, shift, 1.0 + shift);
  const MeasureSpec mu{MeasureSpec::UniformBox{}, dx};
  const MeasureSpec nu{MeasureSpec::UniformBox{}, dy};
  return OtProblem{sobol_pairs(dx, dy, l), marginal, marginal, joint, make_embedding(mu, marginal),
                   make_embedding(nu, marginal)};
}

/// Sobolev kernels that keep the end-to-end barrier well conditioned at l <= 64.
inline OtProblem smooth_translation_problem(std::size_t l) {
  return translation_problem(l, KernelSpec::sobolev(2.0, 1), KernelSpec::sobolev(2.5, 2));
}

}  // namespace ksot::testing
