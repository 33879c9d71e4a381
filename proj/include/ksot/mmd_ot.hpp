#pragma once

#include <Eigen/Dense>

#include "ksot/kernels.hpp"
#include "ksot/sdp_solver.hpp"
#include "ksot/types.hpp"

namespace ksot {

/// Transport-plan problem with MMD-penalized marginals:
///   min  sum_ij G_ij c(x_i, y_j) + 1/(2 lambda2) (r^T K_X r + s^T K_Y s)
///   s.t. sum_ij G_ij Phi_ij Phi_ij^T + lambda1 I is PSD,
/// with r_i = 1/n_mu - sum_j G_ij and s_j = 1/n_nu - sum_i G_ij. Pairs are
/// flattened row-major (i outer), matching product_pairs.
struct PlanProblem {
  Eigen::MatrixXd cost;  // n_mu x n_nu
  Eigen::MatrixXd kx;
  Eigen::MatrixXd ky;
  CholeskyFactor phi_factor;  // on the n_mu * n_nu joint pairs
  double lambda1 = 0.0;
  double lambda2 = 0.0;

  Eigen::Index rows() const { return cost.rows(); }
  Eigen::Index cols() const { return cost.cols(); }
  BarrierProblem barrier_problem() const;
};

struct PlanSolution {
  Eigen::MatrixXd plan;
  double objective = 0.0;
  Eigen::VectorXd row_residual;  // r
  Eigen::VectorXd col_residual;  // s
  DualSolution solver;
};

/// Largest n_mu * n_nu accepted.
inline constexpr Eigen::Index kMaxPlanPairs = 400;

PlanProblem build_plan_problem(const PointList& x_samples, const PointList& y_samples,
                               const KernelSpec& kx, const KernelSpec& ky, const KernelSpec& kxy,
                               double lambda1, double lambda2);

/// Objective of the plan problem at an arbitrary plan.
double plan_objective(const PlanProblem& p, const Eigen::MatrixXd& plan);

PlanSolution solve_plan_problem(const PlanProblem& p, double tau, const BarrierSchedule& schedule = {});

PlanSolution build_and_solve_mmd_ot(const PointList& x_samples, const PointList& y_samples,
                                    const KernelSpec& kx, const KernelSpec& ky, const KernelSpec& kxy,
                                    double lambda1, double lambda2, double tau,
                                    const BarrierSchedule& schedule = {});

/// min over permutations of (1/n) sum_i 1/2 |x_i - y_pi(i)|^2, n <= 7.
double exact_ot_oracle(const PointList& x_samples, const PointList& y_samples);

}  // namespace ksot
