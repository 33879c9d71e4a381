#include "ksot/ot_estimator.hpp"

#include <cmath>
#include <limits>

#include "ksot/errors.hpp"
#include "ksot/parallel.hpp"

namespace ksot {
namespace {

Point joint_point(const Point& x, const Point& y) {
  Point p(x.size() + y.size());
  p << x, y;
  return p;
}

Eigen::LLT<Eigen::MatrixXd> factor_constraint(const DualSolution& sol, const DualData& d) {
  const Eigen::MatrixXd& phi = d.Phi();
  if (phi.cols() != sol.gamma_hat.size()) throw DimensionError("constraint operator: size mismatch");
  Eigen::MatrixXd m = phi * sol.gamma_hat.asDiagonal() * phi.transpose();
  m.diagonal().array() += d.lambda1;
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() != Eigen::Success || !(llt.matrixLLT().diagonal().minCoeff() > 0.0)) {
    throw DomainError("constraint operator: M is singular");
  }
  return llt;
}

OTEstimate summarize(const OtFit& f, const DualData& d) {
  OTEstimate e;
  e.value = compute_ot_hat(f.solution, d);
  e.lambda1 = d.lambda1;
  e.lambda2 = d.lambda2;
  e.delta_final = f.solution.delta_final;
  e.dual_objective = f.solution.objective_value;
  e.newton_iterations = f.solution.newton_iterations;
  e.outer_iterations = f.solution.outer_iterations;
  e.final_decrement = f.solution.final_decrement;
  e.converged = f.solution.converged;
  return e;
}

}  // namespace

double PotentialModel::value(const Point& p) const {
  double s = embedding.value(p);
  for (std::size_t j = 0; j < anchors.size(); ++j) {
    s -= gamma[static_cast<Eigen::Index>(j)] * eval_kernel(kernel, anchors[j], p);
  }
  return s / (2.0 * lambda2);
}

Eigen::VectorXd PotentialModel::values(const PointList& ps) const {
  Eigen::VectorXd out(static_cast<Eigen::Index>(ps.size()));
  for (std::size_t i = 0; i < ps.size(); ++i) out[static_cast<Eigen::Index>(i)] = value(ps[i]);
  return out;
}

Eigen::VectorXd PotentialModel::gradient(const Point& p) const {
  Eigen::VectorXd g = embedding.gradient(p);
  for (std::size_t j = 0; j < anchors.size(); ++j) {
    g -= gamma[static_cast<Eigen::Index>(j)] * kernel_gradient(kernel, p, anchors[j]);
  }
  return g / (2.0 * lambda2);
}

double ConstraintModel::fill_value(Eigen::Index j) const {
  return Phi.col(j).dot(B * Phi.col(j));
}

double ConstraintModel::sos_value(const Point& x, const Point& y) const {
  if (joint_anchors.empty()) throw DomainError("constraint model: no anchors attached");
  const Eigen::VectorXd kp = kernel_column(kernel, joint_anchors, joint_point(x, y));
  return (sos_factor * kp).squaredNorm();
}

double compute_ot_hat(const DualSolution& sol, const DualData& d) {
  const double weighted = sol.gamma_hat.dot(d.w_mu_at_fill + d.w_nu_at_fill);
  return d.q_sq / (2.0 * d.lambda2) - weighted / (2.0 * d.lambda2);
}

double compute_ot_hat(const DualSolution& sol, const DualData& d, const EmbeddingEstimate& emb_mu,
                      const EmbeddingEstimate& emb_nu, const FillSet& fs) {
  if (fs.size() != static_cast<std::size_t>(sol.gamma_hat.size())) {
    throw DimensionError("ot_hat: fill set and solution disagree");
  }
  const double q_sq = emb_mu.norm_sq() + emb_nu.norm_sq();
  const double weighted = sol.gamma_hat.dot(emb_mu.values(fs.xs) + emb_nu.values(fs.ys));
  return q_sq / (2.0 * d.lambda2) - weighted / (2.0 * d.lambda2);
}

std::pair<PotentialModel, PotentialModel> recover_potentials(const DualSolution& sol, const DualData& d,
                                                             const EmbeddingEstimate& emb_mu,
                                                             const EmbeddingEstimate& emb_nu,
                                                             const FillSet& fs, const KernelSpec& kx,
                                                             const KernelSpec& ky) {
  if (fs.size() != static_cast<std::size_t>(sol.gamma_hat.size())) {
    throw DimensionError("potentials: fill set and solution disagree");
  }
  PotentialModel u{sol.gamma_hat, d.lambda2, emb_mu, kx, fs.xs};
  PotentialModel v{sol.gamma_hat, d.lambda2, emb_nu, ky, fs.ys};
  return {std::move(u), std::move(v)};
}

double potential_embedding_inner(const PotentialModel& u) {
  const double cross = u.gamma.dot(u.embedding.values(u.anchors));
  return (u.embedding.norm_sq() - cross) / (2.0 * u.lambda2);
}

double potential_norm_sq(const PotentialModel& u, const Eigen::MatrixXd& anchor_gram) {
  const double cross = u.gamma.dot(u.embedding.values(u.anchors));
  const double quad = u.gamma.dot(anchor_gram * u.gamma);
  return (u.embedding.norm_sq() - 2.0 * cross + quad) / (4.0 * u.lambda2 * u.lambda2);
}

ConstraintModel recover_constraint_operator(const DualSolution& sol, const DualData& d) {
  const auto llt = factor_constraint(sol, d);
  const auto l = d.size();
  const double weight = sol.delta_final / static_cast<double>(l);

  ConstraintModel cm;
  cm.delta = sol.delta_final;
  cm.Phi = d.Phi();
  cm.B = weight * llt.solve(Eigen::MatrixXd::Identity(l, l));
  cm.B = 0.5 * (cm.B + cm.B.transpose());

  // G = sqrt(weight) L_M^{-1} R^{-T}; R^{-T} is lower triangular.
  const Eigen::MatrixXd r_inv_t =
      d.Phi().transpose().triangularView<Eigen::Lower>().solve(Eigen::MatrixXd::Identity(l, l));
  cm.sos_factor = std::sqrt(weight) * llt.matrixL().solve(r_inv_t);
  cm.C = cm.sos_factor.transpose() * cm.sos_factor;
  return cm;
}

ConstraintModel recover_constraint_operator(const DualSolution& sol, const DualData& d,
                                            const FillSet& fs, const KernelSpec& kxy) {
  if (fs.size() != static_cast<std::size_t>(d.size())) {
    throw DimensionError("constraint operator: fill set and data disagree");
  }
  ConstraintModel cm = recover_constraint_operator(sol, d);
  cm.joint_anchors = fs.joint();
  cm.kernel = kxy;
  return cm;
}

ConstraintValue constraint_function(const PotentialModel& u, const PotentialModel& v,
                                    const ConstraintModel* cm, const Point& x, const Point& y) {
  ConstraintValue out{quadratic_cost(x, y) - u.value(x) - v.value(y), std::nullopt};
  if (cm != nullptr) out.sos = cm->sos_value(x, y);
  return out;
}

Point transport_map(const PotentialModel& u, const Point& x) {
  return x - u.gradient(x);
}

PrimalDual primal_objective_and_gap(const PotentialModel& u, const PotentialModel& v,
                                    const ConstraintModel& cm, const DualData& d,
                                    const DualSolution& sol) {
  const double norms = potential_norm_sq(u, d.kx) + potential_norm_sq(v, d.ky);
  const double primal = potential_embedding_inner(u) + potential_embedding_inner(v) -
                        d.lambda1 * cm.B.trace() - d.lambda2 * norms;
  return {primal, sol.objective_value - primal};
}

double constraint_residual_max(const PotentialModel& u, const PotentialModel& v,
                               const ConstraintModel& cm, const DualData& d, const FillSet& fs) {
  double worst = 0.0;
  for (std::size_t j = 0; j < fs.size(); ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    const double r = d.cost_values[jj] - u.value(fs.xs[j]) - v.value(fs.ys[j]) - cm.fill_value(jj);
    worst = std::max(worst, std::abs(r));
  }
  return worst;
}

std::pair<double, double> select_lambdas(LambdaScenario scenario, std::size_t l, std::size_t n_mu,
                                         std::size_t n_nu, int m, int d,
                                         const LambdaConstants& constants, double confidence) {
  if (l == 0 || n_mu == 0 || n_nu == 0) throw DomainError("select_lambdas: counts must be positive");
  const double ld = static_cast<double>(l);
  if (scenario == LambdaScenario::kHeuristic) {
    return {1.0 / ld, 1.0 / std::sqrt(static_cast<double>(n_mu))};
  }
  if (d < 1 || m <= d) throw DomainError("select_lambdas: theory scenarios need m > d >= 1");
  if (!(confidence > 0.0 && confidence < 1.0)) throw DomainError("select_lambdas: confidence in (0, 1)");

  const double rate = -static_cast<double>(m - d) / (2.0 * d);
  const double lambda1 = constants.c1 * std::pow(ld, rate) * std::log(ld / confidence);
  const double n = static_cast<double>(n_mu + n_nu);
  const double log_n = std::log(n / confidence);
  switch (scenario) {
    case LambdaScenario::kExact:
      return {lambda1, lambda1};
    case LambdaScenario::kEvaluation:
      return {lambda1, lambda1 + constants.c * std::pow(n, -static_cast<double>(m + 1) / d) * log_n};
    case LambdaScenario::kSampling:
      return {lambda1, lambda1 + constants.c_prime * std::pow(n, -0.5) * log_n};
    default:
      break;
  }
  throw DomainError("select_lambdas: unknown scenario");
}

DualData base_dual_data(const OtProblem& problem, double lambda1, double lambda2) {
  return build_dual_data(problem.fill, problem.kx, problem.ky, problem.kxy, problem.emb_mu,
                         problem.emb_nu, lambda1, lambda2);
}

OtFit fit(const OtProblem& problem, const DualData& base, double lambda1, double lambda2, double tau,
          const BarrierSchedule& schedule) {
  DualData d = with_lambdas(base, lambda1, lambda2);
  DualSolution sol = solve_dual(d, tau, schedule);
  auto [u, v] = recover_potentials(sol, d, problem.emb_mu, problem.emb_nu, problem.fill, problem.kx,
                                   problem.ky);
  ConstraintModel cm = recover_constraint_operator(sol, d, problem.fill, problem.kxy);
  OtFit f{std::move(d), std::move(sol), std::move(u), std::move(v), std::move(cm), {}};
  f.estimate = summarize(f, f.data);
  const auto pd = primal_objective_and_gap(f.u, f.v, f.constraint, f.data, f.solution);
  f.estimate.primal_objective = pd.primal;
  f.estimate.duality_gap = pd.gap;
  f.estimate.constraint_residual_max = constraint_residual_max(f.u, f.v, f.constraint, f.data, problem.fill);
  return f;
}

OtFit fit(const OtProblem& problem, double lambda1, double lambda2, double tau,
          const BarrierSchedule& schedule) {
  return fit(problem, base_dual_data(problem, lambda1, lambda2), lambda1, lambda2, tau, schedule);
}

GridSearchResult grid_search(const OtProblem& problem, const std::vector<double>& lambda1s,
                             const std::vector<double>& lambda2s, std::optional<double> reference,
                             double tau, int threads, const BarrierSchedule& schedule) {
  if (lambda1s.empty() || lambda2s.empty()) throw DomainError("grid search: empty grid");
  const DualData base = base_dual_data(problem);

  GridSearchResult result;
  for (double l1 : lambda1s) {
    for (double l2 : lambda2s) result.cells.push_back({l1, l2, std::nullopt, {}});
  }
  parallel_for(result.cells.size(), threads, [&](std::size_t i) {
    GridCell& cell = result.cells[i];
    try {
      cell.estimate = fit(problem, base, cell.lambda1, cell.lambda2, tau, schedule).estimate;
    } catch (const std::exception& e) {
      cell.error = e.what();
    }
  });

  double best_score = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < result.cells.size(); ++i) {
    const auto& est = result.cells[i].estimate;
    if (!est || !est->converged) continue;
    const double score = reference ? std::abs(est->value - *reference)
                                   : est->constraint_residual_max / (1.0 + std::abs(est->duality_gap));
    if (score < best_score) {
      best_score = score;
      result.best = i;
    }
  }
  return result;
}

}  // namespace ksot
