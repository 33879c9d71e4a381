#pragma once

#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "ksot/embeddings.hpp"
#include "ksot/geometry.hpp"
#include "ksot/kernels.hpp"
#include "ksot/linalg.hpp"

namespace ksot {

/// min_g  1/2 g^T H g - b^T g + constant
/// s.t.   M(g) = sum_i g_i Phi_i Phi_i^T + lambda1 I  is PSD.
///
/// Every problem in this library (the kernel SoS dual and the MMD-regularized
/// plan problem) is of this form; the barrier machinery below operates on it.
struct BarrierProblem {
  Eigen::MatrixXd quadratic;  // H, symmetric PSD
  Eigen::VectorXd linear;     // b
  double constant = 0.0;
  Eigen::MatrixXd phi;  // column i is Phi_i
  double lambda1 = 0.0;

  Eigen::Index size() const { return linear.size(); }
  /// Barrier-free objective F(g).
  double objective(const Eigen::VectorXd& g) const;
};

/// Finite-dimensional dual of the kernel SoS problem.
struct DualData {
  Eigen::MatrixXd kx;  // k_X(x_i, x_j)
  Eigen::MatrixXd ky;  // k_Y(y_i, y_j)
  Eigen::MatrixXd Q;   // kx + ky
  Eigen::VectorXd z;   // w_mu(x_j) + w_nu(y_j) - 2 lambda2 c(x_j, y_j)
  Eigen::VectorXd w_mu_at_fill;
  Eigen::VectorXd w_nu_at_fill;
  Eigen::VectorXd cost_values;  // 1/2 |x_j - y_j|^2
  double q_sq = 0.0;
  CholeskyFactor phi_factor;  // K_XY + jitter I = R^T R; Phi_j = column j of R
  double lambda1 = 0.0;
  double lambda2 = 0.0;

  const Eigen::MatrixXd& Phi() const { return phi_factor.R; }
  Eigen::Index size() const { return z.size(); }

  /// H = Q / (2 lambda2), b = z / (2 lambda2), constant = q^2 / (4 lambda2).
  BarrierProblem barrier_problem() const;
};

/// Quadratic transport cost 1/2 |x - y|^2.
double quadratic_cost(const Point& x, const Point& y);

DualData build_dual_data(const FillSet& fs, const KernelSpec& kx, const KernelSpec& ky,
                         const KernelSpec& kxy, const EmbeddingEstimate& emb_mu,
                         const EmbeddingEstimate& emb_nu, double lambda1, double lambda2);

/// Same data with different regularization (only z depends on lambda2).
DualData with_lambdas(DualData d, double lambda1, double lambda2);

/// Smallest eigenvalue of sum_i g_i Phi_i Phi_i^T + lambda1 I.
double check_feasible(const Eigen::VectorXd& gamma, const Eigen::MatrixXd& phi, double lambda1);

/// Whether check_feasible's value counts as feasible.
bool is_feasible_eigenvalue(double min_eig, double lambda1);

/// J(g) = F(g) - constant - (delta / l) log det M(g). Throws DomainError when
/// M(g) is not positive definite.
double barrier_objective(const BarrierProblem& p, const Eigen::VectorXd& gamma, double delta);
double barrier_objective(const DualData& d, const Eigen::VectorXd& gamma, double delta);

/// Gradient and Hessian of J:
///   J'_i  = (H g - b)_i - (delta / l) Phi_i^T M^{-1} Phi_i
///   J''_ij = H_ij + (delta / l) (Phi_i^T M^{-1} Phi_j)^2
std::pair<Eigen::VectorXd, Eigen::MatrixXd> barrier_derivatives(const BarrierProblem& p,
                                                                const Eigen::VectorXd& gamma,
                                                                double delta);
std::pair<Eigen::VectorXd, Eigen::MatrixXd> barrier_derivatives(const DualData& d,
                                                                const Eigen::VectorXd& gamma,
                                                                double delta);

/// Interior iterate of the barrier method.
struct BarrierState {
  Eigen::VectorXd gamma;
  double delta = 1.0;
  double decrement = 0.0;  // Newton decrement of J at gamma
  double objective = 0.0;  // J(gamma)
  Eigen::VectorXd newton_direction;  // [J'']^{-1} J' at gamma
  Eigen::MatrixXd M;
  Eigen::LLT<Eigen::MatrixXd> M_factor;
};

/// Builds the state at an interior point (computes M, J and the decrement).
BarrierState make_barrier_state(const BarrierProblem& p, Eigen::VectorXd gamma, double delta);

/// g' = g - [J'']^{-1} J' / (1 + sqrt(l / delta) lambda(g)). If rounding pushes
/// g' outside the interior, the step is halved until it is interior again.
BarrierState damped_newton_step(const BarrierProblem& p, const BarrierState& state);
BarrierState damped_newton_step(const DualData& d, const BarrierState& state);

/// Backtracking from the full Newton step (Armijo condition), never shorter
/// than the damped step. Returns nullopt when no step along the Newton
/// direction lowers J, which only happens at the floating-point floor.
std::optional<BarrierState> line_search_newton_step(const BarrierProblem& p, const BarrierState& state);

enum class NewtonRule { kDamped, kLineSearch };

struct BarrierSchedule {
  double delta0 = 1.0;
  double shrink = 0.5;
  double inner_tol = 1e-8;  // Newton decrement
  int max_outer = 200;
  int max_inner = 100;
  NewtonRule rule = NewtonRule::kLineSearch;
  /// At the final delta, keep stepping past inner_tol until the decrement
  /// stops shrinking (rounding floor) or max_inner is reached.
  bool polish = true;
};

struct PathPoint {
  double delta;
  double objective;  // F at the inner solution
  int newton_iterations;
};

struct DualSolution {
  Eigen::VectorXd gamma_hat;
  double delta_final = 0.0;
  int newton_iterations = 0;
  int outer_iterations = 0;
  double min_eig_M = 0.0;
  double objective_value = 0.0;  // F(gamma_hat), constant included
  double final_decrement = 0.0;
  bool converged = false;
  int stalled_centerings = 0;  // inner loops that ended above inner_tol
  std::vector<PathPoint> path;
};

/// Path-following barrier method from g = 0: for each delta, Newton steps
/// until the decrement drops below inner_tol, then delta <- shrink * delta,
/// until delta <= tau. An inner loop also ends when the decrement stops
/// shrinking inside the quadratic region, or when the line search finds no
/// descent (rounding floor). converged is set from the final iterate only:
/// delta <= tau and sqrt(l / delta) * decrement <= 1/4. Budget exhaustion
/// returns the last iterate.
DualSolution solve_barrier(const BarrierProblem& p, double tau, const BarrierSchedule& schedule = {});
DualSolution solve_dual(const DualData& d, double tau, const BarrierSchedule& schedule = {});

}  // namespace ksot
