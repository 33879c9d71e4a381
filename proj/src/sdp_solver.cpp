#include "ksot/sdp_solver.hpp"

#include <cmath>
#include <limits>
#include <optional>

#include "ksot/errors.hpp"

namespace ksot {
namespace {

// Scaled Newton decrement below which full Newton steps converge quadratically.
constexpr double kQuadraticRegion = 0.25;

Eigen::MatrixXd constraint_matrix(const Eigen::MatrixXd& phi, const Eigen::VectorXd& gamma,
                                  double lambda1) {
  if (phi.cols() != gamma.size()) throw DimensionError("constraint: gamma and Phi disagree");
  Eigen::MatrixXd m = phi * gamma.asDiagonal() * phi.transpose();
  m.diagonal().array() += lambda1;
  return m;
}

// Cholesky of M(gamma); throws DomainError off the interior.
Eigen::LLT<Eigen::MatrixXd> interior_factor(const Eigen::MatrixXd& m) {
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() != Eigen::Success || !(llt.matrixLLT().diagonal().minCoeff() > 0.0)) {
    throw DomainError("barrier: iterate is not interior (constraint matrix not positive definite)");
  }
  return llt;
}

bool try_interior_factor(const Eigen::MatrixXd& m, Eigen::LLT<Eigen::MatrixXd>& out) {
  out.compute(m);
  return out.info() == Eigen::Success && out.matrixLLT().diagonal().minCoeff() > 0.0;
}

double log_det(const Eigen::LLT<Eigen::MatrixXd>& llt) {
  return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

double quadratic_part(const BarrierProblem& p, const Eigen::VectorXd& g) {
  return 0.5 * g.dot(p.quadratic * g) - p.linear.dot(g);
}

// Phi^T M^{-1} Phi from the lower factor of M.
Eigen::MatrixXd scaled_gram(const BarrierProblem& p, const Eigen::LLT<Eigen::MatrixXd>& llt) {
  const Eigen::MatrixXd w = llt.matrixL().solve(p.phi);
  return w.transpose() * w;
}

struct NewtonData {
  Eigen::VectorXd grad;
  Eigen::VectorXd direction;  // [J'']^{-1} J'
  double decrement;
};

NewtonData newton_data(const BarrierProblem& p, const BarrierState& s) {
  const double weight = s.delta / static_cast<double>(p.size());
  const Eigen::MatrixXd sg = scaled_gram(p, s.M_factor);
  NewtonData nd;
  nd.grad = p.quadratic * s.gamma - p.linear - weight * sg.diagonal();
  Eigen::MatrixXd hess = p.quadratic + weight * sg.cwiseProduct(sg);
  try {
    const auto llt = llt_with_jitter(hess);
    nd.direction = llt.solve(nd.grad);
  } catch (const NotPsdError&) {
    throw SolverError("damped Newton: Hessian system could not be factorized");
  }
  nd.decrement = std::sqrt(std::max(0.0, nd.grad.dot(nd.direction)));
  return nd;
}

void validate(const BarrierProblem& p) {
  const auto n = p.size();
  if (p.quadratic.rows() != n || p.quadratic.cols() != n || p.phi.cols() != n) {
    throw DimensionError("barrier problem: inconsistent shapes");
  }
  if (!(p.lambda1 > 0.0)) throw DomainError("barrier problem: lambda1 must be positive");
}

// Fills gamma, M, its factor and J at gamma - step * direction; false off the interior.
bool try_step(const BarrierProblem& p, const BarrierState& state, double step, BarrierState& next) {
  next.delta = state.delta;
  next.gamma = state.gamma - step * state.newton_direction;
  next.M = constraint_matrix(p.phi, next.gamma, p.lambda1);
  if (!try_interior_factor(next.M, next.M_factor)) return false;
  next.objective = quadratic_part(p, next.gamma) -
                   state.delta / static_cast<double>(p.size()) * log_det(next.M_factor);
  return true;
}

void finish_state(const BarrierProblem& p, BarrierState& s) {
  auto nd = newton_data(p, s);
  s.decrement = nd.decrement;
  s.newton_direction = std::move(nd.direction);
}

}  // namespace

double BarrierProblem::objective(const Eigen::VectorXd& g) const {
  return quadratic_part(*this, g) + constant;
}

BarrierProblem DualData::barrier_problem() const {
  BarrierProblem p;
  p.quadratic = Q / (2.0 * lambda2);
  p.linear = z / (2.0 * lambda2);
  p.constant = q_sq / (4.0 * lambda2);
  p.phi = Phi();
  p.lambda1 = lambda1;
  return p;
}

double quadratic_cost(const Point& x, const Point& y) {
  if (x.size() != y.size()) throw DimensionError("cost: x and y must share a dimension");
  return 0.5 * (x - y).squaredNorm();
}

DualData build_dual_data(const FillSet& fs, const KernelSpec& kx, const KernelSpec& ky,
                         const KernelSpec& kxy, const EmbeddingEstimate& emb_mu,
                         const EmbeddingEstimate& emb_nu, double lambda1, double lambda2) {
  if (!(lambda1 > 0.0) || !(lambda2 > 0.0)) throw DomainError("dual data: lambdas must be positive");
  if (fs.size() == 0) throw DomainError("dual data: empty fill set");
  DualData d;
  d.lambda1 = lambda1;
  d.lambda2 = lambda2;
  d.kx = gram(kx, fs.xs).entries;
  d.ky = gram(ky, fs.ys).entries;
  d.Q = d.kx + d.ky;
  d.phi_factor = cholesky_psd(gram(kxy, fs.joint()));
  const auto n = static_cast<Eigen::Index>(fs.size());
  d.cost_values.resize(n);
  for (Eigen::Index j = 0; j < n; ++j) d.cost_values[j] = quadratic_cost(fs.xs[j], fs.ys[j]);
  d.w_mu_at_fill = emb_mu.values(fs.xs);
  d.w_nu_at_fill = emb_nu.values(fs.ys);
  d.z = d.w_mu_at_fill + d.w_nu_at_fill - 2.0 * lambda2 * d.cost_values;
  d.q_sq = emb_mu.norm_sq() + emb_nu.norm_sq();
  return d;
}

DualData with_lambdas(DualData d, double lambda1, double lambda2) {
  if (!(lambda1 > 0.0) || !(lambda2 > 0.0)) throw DomainError("dual data: lambdas must be positive");
  d.lambda1 = lambda1;
  d.lambda2 = lambda2;
  d.z = d.w_mu_at_fill + d.w_nu_at_fill - 2.0 * lambda2 * d.cost_values;
  return d;
}

double check_feasible(const Eigen::VectorXd& gamma, const Eigen::MatrixXd& phi, double lambda1) {
  return min_eigenvalue(constraint_matrix(phi, gamma, lambda1));
}

bool is_feasible_eigenvalue(double min_eig, double lambda1) {
  return min_eig >= -1e-10 * (1.0 + std::abs(lambda1));
}

double barrier_objective(const BarrierProblem& p, const Eigen::VectorXd& gamma, double delta) {
  validate(p);
  const auto llt = interior_factor(constraint_matrix(p.phi, gamma, p.lambda1));
  return quadratic_part(p, gamma) - delta / static_cast<double>(p.size()) * log_det(llt);
}

double barrier_objective(const DualData& d, const Eigen::VectorXd& gamma, double delta) {
  return barrier_objective(d.barrier_problem(), gamma, delta);
}

std::pair<Eigen::VectorXd, Eigen::MatrixXd> barrier_derivatives(const BarrierProblem& p,
                                                                const Eigen::VectorXd& gamma,
                                                                double delta) {
  validate(p);
  const auto llt = interior_factor(constraint_matrix(p.phi, gamma, p.lambda1));
  const double weight = delta / static_cast<double>(p.size());
  const Eigen::MatrixXd sg = scaled_gram(p, llt);
  Eigen::VectorXd grad = p.quadratic * gamma - p.linear - weight * sg.diagonal();
  Eigen::MatrixXd hess = p.quadratic + weight * sg.cwiseProduct(sg);
  return {std::move(grad), std::move(hess)};
}

std::pair<Eigen::VectorXd, Eigen::MatrixXd> barrier_derivatives(const DualData& d,
                                                                const Eigen::VectorXd& gamma,
                                                                double delta) {
  return barrier_derivatives(d.barrier_problem(), gamma, delta);
}

BarrierState make_barrier_state(const BarrierProblem& p, Eigen::VectorXd gamma, double delta) {
  validate(p);
  if (!(delta > 0.0)) throw DomainError("barrier: delta must be positive");
  BarrierState s;
  s.gamma = std::move(gamma);
  s.delta = delta;
  s.M = constraint_matrix(p.phi, s.gamma, p.lambda1);
  s.M_factor = interior_factor(s.M);
  s.objective = quadratic_part(p, s.gamma) - delta / static_cast<double>(p.size()) * log_det(s.M_factor);
  finish_state(p, s);
  return s;
}

BarrierState damped_newton_step(const BarrierProblem& p, const BarrierState& state) {
  const double l = static_cast<double>(p.size());
  double step = 1.0 / (1.0 + std::sqrt(l / state.delta) * state.decrement);

  BarrierState next;
  for (int halvings = 0;; ++halvings) {
    if (try_step(p, state, step, next)) break;
    if (halvings == 60) throw SolverError("damped Newton: could not stay interior");
    step *= 0.5;
  }
  finish_state(p, next);
  return next;
}

std::optional<BarrierState> line_search_newton_step(const BarrierProblem& p, const BarrierState& state) {
  constexpr double kArmijo = 0.25;
  const double l = static_cast<double>(p.size());
  const double damped = 1.0 / (1.0 + std::sqrt(l / state.delta) * state.decrement);
  const double slope = state.decrement * state.decrement;

  BarrierState next;
  // Inside the quadratic-convergence region the full step is safe; J is not
  // compared there because its rounding noise exceeds the predicted decrease.
  if (std::sqrt(l / state.delta) * state.decrement <= kQuadraticRegion && try_step(p, state, 1.0, next)) {
    finish_state(p, next);
    return next;
  }
  for (double step = 1.0; step > damped; step *= 0.5) {
    if (try_step(p, state, step, next) && next.objective <= state.objective - kArmijo * step * slope) {
      finish_state(p, next);
      return next;
    }
  }
  double step = damped;
  for (int halvings = 0; halvings <= 60; ++halvings, step *= 0.5) {
    if (!try_step(p, state, step, next)) continue;
    if (!(next.objective < state.objective)) return std::nullopt;
    finish_state(p, next);
    return next;
  }
  return std::nullopt;
}

BarrierState damped_newton_step(const DualData& d, const BarrierState& state) {
  return damped_newton_step(d.barrier_problem(), state);
}

DualSolution solve_barrier(const BarrierProblem& p, double tau, const BarrierSchedule& schedule) {
  // Consecutive steps without a smaller decrement before the loop is declared stalled.
  constexpr int kStallSteps = 5;
  const double l = static_cast<double>(p.size());
  if (!(tau > 0.0)) throw DomainError("solve: tau must be positive");
  if (!(schedule.shrink > 0.0 && schedule.shrink < 1.0)) {
    throw DomainError("solve: shrink must lie in (0, 1)");
  }
  DualSolution sol;
  BarrierState state = make_barrier_state(p, Eigen::VectorXd::Zero(p.size()), schedule.delta0);

  for (int outer = 0;; ++outer) {
    int inner = 0;
    std::optional<BarrierState> best;  // smallest decrement seen near the centre
    int without_progress = 0;
    const bool final_delta = state.delta <= tau;
    const double tol = final_delta && schedule.polish ? 0.0 : schedule.inner_tol;
    while (state.decrement > tol && inner < schedule.max_inner) {
      std::optional<BarrierState> next;
      if (schedule.rule == NewtonRule::kLineSearch) {
        next = line_search_newton_step(p, state);
      } else {
        next = damped_newton_step(p, state);
      }
      ++inner;
      if (!next) {
        // No descent along the Newton direction: the rounding floor.
        break;
      }
      state = std::move(*next);
      if (std::sqrt(l / state.delta) * state.decrement > kQuadraticRegion) continue;
      if (!best || state.decrement < best->decrement) {
        best = state;
        without_progress = 0;
      } else if (++without_progress == kStallSteps) {
        state = std::move(*best);
        break;
      }
    }
    if (state.decrement > schedule.inner_tol) ++sol.stalled_centerings;
    sol.newton_iterations += inner;
    sol.outer_iterations = outer + 1;
    sol.path.push_back({state.delta, p.objective(state.gamma), inner});

    if (state.delta <= tau || outer + 1 >= schedule.max_outer) break;
    const double next_delta = std::max(state.delta * schedule.shrink, 0.0);
    state = make_barrier_state(p, std::move(state.gamma), next_delta);
  }

  // Certified by the final state alone: on the last barrier level and
  // inside the quadratic convergence region of its centre.
  sol.converged = state.delta <= tau && std::sqrt(l / state.delta) * state.decrement <= kQuadraticRegion;
  sol.gamma_hat = state.gamma;
  sol.delta_final = state.delta;
  sol.final_decrement = state.decrement;
  sol.min_eig_M = min_eigenvalue(state.M);
  sol.objective_value = p.objective(state.gamma);
  return sol;
}

DualSolution solve_dual(const DualData& d, double tau, const BarrierSchedule& schedule) {
  return solve_barrier(d.barrier_problem(), tau, schedule);
}

}  // namespace ksot
