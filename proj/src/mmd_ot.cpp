#include "ksot/mmd_ot.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <vector>

#include "ksot/errors.hpp"
#include "ksot/geometry.hpp"

namespace ksot {
namespace {

// P maps the flattened plan to its row sums, S to its column sums.
Eigen::MatrixXd row_sum_operator(Eigen::Index n, Eigen::Index m) {
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(n, n * m);
  for (Eigen::Index i = 0; i < n; ++i) p.block(i, i * m, 1, m).setOnes();
  return p;
}

Eigen::MatrixXd col_sum_operator(Eigen::Index n, Eigen::Index m) {
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(m, n * m);
  for (Eigen::Index i = 0; i < n; ++i) s.block(0, i * m, m, m).setIdentity();
  return s;
}

Eigen::VectorXd flatten(const Eigen::MatrixXd& plan) {
  Eigen::VectorXd g(plan.size());
  for (Eigen::Index i = 0; i < plan.rows(); ++i) {
    for (Eigen::Index j = 0; j < plan.cols(); ++j) g[i * plan.cols() + j] = plan(i, j);
  }
  return g;
}

Eigen::MatrixXd unflatten(const Eigen::VectorXd& g, Eigen::Index n, Eigen::Index m) {
  Eigen::MatrixXd plan(n, m);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) plan(i, j) = g[i * m + j];
  }
  return plan;
}

}  // namespace

BarrierProblem PlanProblem::barrier_problem() const {
  const Eigen::Index n = rows();
  const Eigen::Index m = cols();
  const Eigen::MatrixXd p = row_sum_operator(n, m);
  const Eigen::MatrixXd s = col_sum_operator(n, m);
  const Eigen::VectorXd a = Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
  const Eigen::VectorXd b = Eigen::VectorXd::Constant(m, 1.0 / static_cast<double>(m));

  BarrierProblem bp;
  bp.quadratic = (p.transpose() * kx * p + s.transpose() * ky * s) / lambda2;
  bp.linear = (p.transpose() * (kx * a) + s.transpose() * (ky * b)) / lambda2 - flatten(cost);
  bp.constant = (a.dot(kx * a) + b.dot(ky * b)) / (2.0 * lambda2);
  bp.phi = phi_factor.R;
  bp.lambda1 = lambda1;
  return bp;
}

PlanProblem build_plan_problem(const PointList& x_samples, const PointList& y_samples,
                               const KernelSpec& kx, const KernelSpec& ky, const KernelSpec& kxy,
                               double lambda1, double lambda2) {
  if (x_samples.empty() || y_samples.empty()) throw DomainError("mmd_ot: empty sample set");
  if (!(lambda1 > 0.0) || !(lambda2 > 0.0)) throw DomainError("mmd_ot: lambdas must be positive");
  const auto n = static_cast<Eigen::Index>(x_samples.size());
  const auto m = static_cast<Eigen::Index>(y_samples.size());
  if (n * m > kMaxPlanPairs) throw BudgetError("mmd_ot: n_mu * n_nu exceeds 400");

  PlanProblem p;
  p.lambda1 = lambda1;
  p.lambda2 = lambda2;
  p.cost.resize(n, m);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) {
      p.cost(i, j) = quadratic_cost(x_samples[static_cast<std::size_t>(i)], y_samples[static_cast<std::size_t>(j)]);
    }
  }
  p.kx = gram(kx, x_samples).entries;
  p.ky = gram(ky, y_samples).entries;
  p.phi_factor = cholesky_psd(gram(kxy, product_pairs(x_samples, y_samples).joint()));
  return p;
}

double plan_objective(const PlanProblem& p, const Eigen::MatrixXd& plan) {
  return p.barrier_problem().objective(flatten(plan));
}

PlanSolution solve_plan_problem(const PlanProblem& p, double tau, const BarrierSchedule& schedule) {
  const BarrierProblem bp = p.barrier_problem();
  PlanSolution out;
  out.solver = solve_barrier(bp, tau, schedule);
  out.plan = unflatten(out.solver.gamma_hat, p.rows(), p.cols());
  out.objective = out.solver.objective_value;
  out.row_residual = Eigen::VectorXd::Constant(p.rows(), 1.0 / static_cast<double>(p.rows())) -
                     out.plan.rowwise().sum();
  out.col_residual = Eigen::VectorXd::Constant(p.cols(), 1.0 / static_cast<double>(p.cols())) -
                     out.plan.colwise().sum().transpose();
  return out;
}

PlanSolution build_and_solve_mmd_ot(const PointList& x_samples, const PointList& y_samples,
                                    const KernelSpec& kx, const KernelSpec& ky, const KernelSpec& kxy,
                                    double lambda1, double lambda2, double tau,
                                    const BarrierSchedule& schedule) {
  return solve_plan_problem(build_plan_problem(x_samples, y_samples, kx, ky, kxy, lambda1, lambda2),
                            tau, schedule);
}

double exact_ot_oracle(const PointList& x_samples, const PointList& y_samples) {
  const std::size_t n = x_samples.size();
  if (n != y_samples.size()) throw DimensionError("exact OT: sample sets must have equal size");
  if (n == 0) throw DomainError("exact OT: empty sample set");
  if (n > 7) throw BudgetError("exact OT: n must be at most 7");
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) total += quadratic_cost(x_samples[i], y_samples[perm[i]]);
    best = std::min(best, total / static_cast<double>(n));
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

}  // namespace ksot
