#include <cmath>
#include <random>

#include "doctest.h"
#include "ksot/embeddings.hpp"
#include "ksot/errors.hpp"
#include "ksot/sdp_solver.hpp"
#include "oracles.hpp"

using namespace ksot;
using ksot::testing::random_dual;

namespace {

DualData scalar_dual(double q, double z, double phi, double lambda1, double lambda2) {
  DualData d;
  d.kx = Eigen::MatrixXd::Constant(1, 1, q / 2.0);
  d.ky = d.kx;
  d.Q = Eigen::MatrixXd::Constant(1, 1, q);
  d.z = Eigen::VectorXd::Constant(1, z);
  d.w_mu_at_fill = Eigen::VectorXd::Constant(1, z);
  d.w_nu_at_fill = Eigen::VectorXd::Zero(1);
  d.cost_values = Eigen::VectorXd::Zero(1);
  d.q_sq = 0.0;
  d.phi_factor.R = Eigen::MatrixXd::Constant(1, 1, phi);
  d.lambda1 = lambda1;
  d.lambda2 = lambda2;
  return d;
}

Eigen::VectorXd interior_point(std::mt19937_64& rng, const DualData& d) {
  std::normal_distribution<double> n01;
  Eigen::VectorXd g = Eigen::VectorXd::NullaryExpr(d.size(), [&] { return 0.3 * n01(rng); });
  while (check_feasible(g, d.Phi(), d.lambda1) <= 0.05 * d.lambda1) g *= 0.5;
  return g;
}

}  // namespace

TEST_CASE("barrier objective on the scalar toy problem") {
  const DualData d = scalar_dual(2.0, 0.0, 1.0, 1.0, 0.5);
  CHECK(barrier_objective(d, Eigen::VectorXd::Zero(1), 1.0) == doctest::Approx(0.0));
  CHECK(barrier_objective(d, Eigen::VectorXd::Ones(1), 1.0) == doctest::Approx(1.0 - std::log(2.0)).epsilon(1e-14));
  CHECK_THROWS_AS(barrier_objective(d, Eigen::VectorXd::Constant(1, -1.0), 1.0), DomainError);
}

TEST_CASE("dual data from kernels and embeddings") {
  const auto k1 = KernelSpec::sobolev(1.5, 1);
  const auto k2 = KernelSpec::sobolev(1.5, 2);
  const Domain dom = Domain::cube(1, 0.0, 1.0);
  const auto emb = exact_embedding(MeasureSpec{MeasureSpec::UniformBox{}, dom}, k1);
  FillSet fs;
  fs.xs = {Point::Zero(1)};
  fs.ys = {Point::Zero(1)};
  DualData d = build_dual_data(fs, k1, k1, k2, emb, emb, 0.1, 0.2);
  CHECK(d.Q(0, 0) == 2.0);
  CHECK(d.cost_values[0] == 0.0);
  CHECK(d.z[0] == doctest::Approx(2.0 * emb.value(Point::Zero(1))));
  CHECK(d.q_sq == doctest::Approx(2.0 * emb.norm_sq()));

  fs.ys = {Point::Ones(1)};
  d = build_dual_data(fs, k1, k1, k2, emb, emb, 0.1, 0.2);
  CHECK(d.cost_values[0] == 0.5);
  CHECK(d.z[0] == doctest::Approx(emb.value(Point::Zero(1)) + emb.value(Point::Ones(1)) - 0.2));

  const FillSet many = sobol_pairs(dom, dom, 40);
  d = build_dual_data(many, k1, k1, k2, emb, emb, 0.1, 0.2);
  CHECK(min_eigenvalue(d.Q) >= -1e-8 * 40);
  const Eigen::MatrixXd kxy = gram(k2, many.joint()).entries;
  CHECK((d.Phi().transpose() * d.Phi() - kxy).cwiseAbs().maxCoeff() <= 1e-8);

  const DualData moved = with_lambdas(d, 0.3, 0.4);
  CHECK(moved.z[5] == doctest::Approx(d.w_mu_at_fill[5] + d.w_nu_at_fill[5] - 0.8 * d.cost_values[5]));
  CHECK_THROWS_AS(build_dual_data(many, k1, k1, k2, emb, emb, 0.0, 0.2), DomainError);
}

TEST_CASE("barrier derivatives match finite differences") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 5; ++trial) {
    const DualData d = random_dual(rng, 8);
    const Eigen::VectorXd g = interior_point(rng, d);
    const double delta = 0.3;
    const auto [grad, hess] = barrier_derivatives(d, g, delta);
    const double h = 1e-6;
    Eigen::VectorXd fd_grad(8);
    Eigen::MatrixXd fd_hess(8, 8);
    for (int i = 0; i < 8; ++i) {
      Eigen::VectorXd a = g, b = g;
      a[i] += h;
      b[i] -= h;
      fd_grad[i] = (barrier_objective(d, a, delta) - barrier_objective(d, b, delta)) / (2 * h);
      fd_hess.col(i) = (barrier_derivatives(d, a, delta).first - barrier_derivatives(d, b, delta).first) / (2 * h);
    }
    CHECK((grad - fd_grad).norm() <= 1e-6 * grad.norm());
    CHECK((hess - fd_hess).norm() <= 1e-5 * hess.norm());
    CHECK(min_eigenvalue(hess) >= -1e-10);
  }
}

TEST_CASE("barrier objective is convex at random interior points") {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 1000; ++trial) {
    const int l = 1 + trial % 16;
    const DualData d = random_dual(rng, l);
    const auto hess = barrier_derivatives(d, interior_point(rng, d), 0.5).second;
    CHECK(min_eigenvalue(hess) >= -1e-10 * (1.0 + hess.norm()));
  }
}

TEST_CASE("damped newton step") {
  // J'(0) = -z / (2 lambda2) - delta phi^2 / lambda1 vanishes for z = -1.
  const DualData fixed = scalar_dual(2.0, -1.0, 1.0, 1.0, 0.5);
  const BarrierProblem fp = fixed.barrier_problem();
  const BarrierState s0 = make_barrier_state(fp, Eigen::VectorXd::Zero(1), 1.0);
  CHECK(s0.decrement == doctest::Approx(0.0));
  CHECK(damped_newton_step(fp, s0).gamma[0] == doctest::Approx(0.0));

  const DualData toy = scalar_dual(2.0, 3.0, 1.0, 1.0, 0.5);
  const BarrierProblem tp = toy.barrier_problem();
  const BarrierState t0 = make_barrier_state(tp, Eigen::VectorXd::Zero(1), 1.0);
  CHECK(barrier_objective(toy, damped_newton_step(tp, t0).gamma, 1.0) < barrier_objective(toy, t0.gamma, 1.0));

  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 10; ++trial) {
    const DualData d = random_dual(rng, 1 + 15 * trial / 9);
    const BarrierProblem p = d.barrier_problem();
    BarrierState s = make_barrier_state(p, Eigen::VectorXd::Zero(d.size()), 0.25);
    for (int step = 0; step < 50; ++step) {
      const BarrierState next = damped_newton_step(p, s);
      CHECK(std::isfinite(next.decrement));
      CHECK(next.objective <= s.objective + 1e-12 * (1.0 + std::abs(s.objective)));
      s = next;
    }
  }
}

TEST_CASE("line-search step never does worse than the damped step") {
  std::mt19937_64 rng(14);
  for (int trial = 0; trial < 20; ++trial) {
    const DualData d = random_dual(rng, 6);
    const BarrierProblem p = d.barrier_problem();
    const BarrierState s = make_barrier_state(p, Eigen::VectorXd::Zero(6), 0.1);
    const auto ls = line_search_newton_step(p, s);
    REQUIRE(ls.has_value());
    CHECK(ls->objective < s.objective);
    CHECK(check_feasible(ls->gamma, d.Phi(), d.lambda1) > 0.0);
  }
}

TEST_CASE("check_feasible") {
  std::mt19937_64 rng(15);
  const DualData d = random_dual(rng, 5);
  CHECK(check_feasible(Eigen::VectorXd::Zero(5), d.Phi(), d.lambda1) == doctest::Approx(d.lambda1));
  CHECK(check_feasible(Eigen::VectorXd::Constant(1, -0.3), Eigen::MatrixXd::Ones(1, 1), 0.3) ==
        doctest::Approx(0.0).epsilon(1e-15));
  const Eigen::VectorXd g = Eigen::VectorXd::Random(5);
  Eigen::MatrixXd m = d.Phi() * g.asDiagonal() * d.Phi().transpose();
  m.diagonal().array() += d.lambda1;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  CHECK(check_feasible(g, d.Phi(), d.lambda1) == doctest::Approx(es.eigenvalues()[0]).epsilon(1e-10));
  CHECK(is_feasible_eigenvalue(-1e-12, 1.0));
  CHECK_FALSE(is_feasible_eigenvalue(-1e-6, 1.0));
}

TEST_CASE("solve_dual on scalar problems") {
  // Inactive constraint: gamma -> z / Q.
  const auto inactive = solve_dual(scalar_dual(2.0, 1.0, 1.0, 10.0, 0.5), 1e-8);
  CHECK(inactive.converged);
  CHECK(inactive.gamma_hat[0] == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(inactive.delta_final <= 1e-8);

  // Unconstrained optimum -50 is infeasible: the boundary -lambda1 is hit.
  const auto active = solve_dual(scalar_dual(2.0, -100.0, 1.0, 0.1, 0.5), 1e-8);
  CHECK(active.converged);
  CHECK(std::abs(active.gamma_hat[0] + 0.1) <= 1e-6);
  CHECK(is_feasible_eigenvalue(active.min_eig_M, 0.1));
}

TEST_CASE("solve_dual matches the grid oracle and honours the precision") {
  std::mt19937_64 rng(16);
  for (int trial = 0; trial < 6; ++trial) {
    const DualData d = random_dual(rng, 1 + trial % 2);
    const auto sol = solve_dual(d, 1e-6);
    CHECK(sol.converged);
    CHECK(std::abs(sol.objective_value - testing::grid_oracle(d)) <= 1e-5);
  }
  for (int trial = 0; trial < 5; ++trial) {
    const DualData d = random_dual(rng, 6);
    double previous_tau = 1e-3;
    double previous = solve_dual(d, previous_tau).objective_value;
    for (double tau : {5e-4, 2.5e-4, 1.25e-4}) {
      const double f = solve_dual(d, tau).objective_value;
      CHECK(std::abs(f - previous) <= previous_tau);
      previous = f;
      previous_tau = tau;
    }
  }
}

TEST_CASE("solver invariants") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 5; ++trial) {
    const DualData d = random_dual(rng, 10);
    const auto sol = solve_dual(d, 1e-7);
    CHECK(sol.converged);
    CHECK(sol.delta_final <= 1e-7);
    CHECK(is_feasible_eigenvalue(sol.min_eig_M, d.lambda1));
    for (std::size_t i = 1; i < sol.path.size(); ++i) {
      CHECK(sol.path[i].objective <= sol.path[i - 1].objective + 1e-10);
    }
    const Eigen::VectorXd& g = sol.gamma_hat;
    const double f = g.dot(d.Q * g) / (4 * d.lambda2) - d.z.dot(g) / (2 * d.lambda2) + d.q_sq / (4 * d.lambda2);
    CHECK(sol.objective_value == doctest::Approx(f).epsilon(1e-12));
    const auto again = solve_dual(d, 1e-7);
    CHECK((again.gamma_hat - sol.gamma_hat).norm() == 0.0);
  }
}

TEST_CASE("budget exhaustion is reported, not thrown") {
  std::mt19937_64 rng(18);
  const DualData d = random_dual(rng, 4);
  BarrierSchedule tight;
  tight.max_outer = 3;
  const auto sol = solve_dual(d, 1e-9, tight);
  CHECK_FALSE(sol.converged);
  CHECK(sol.outer_iterations == 3);
  CHECK_THROWS_AS(solve_dual(d, 0.0), DomainError);
}

TEST_CASE("pure damped schedule reaches the same solution") {
  std::mt19937_64 rng(19);
  const DualData d = random_dual(rng, 5);
  BarrierSchedule damped;
  damped.rule = NewtonRule::kDamped;
  damped.max_inner = 2000;
  const auto a = solve_dual(d, 1e-6, damped);
  const auto b = solve_dual(d, 1e-6);
  CHECK(a.converged);
  CHECK(std::abs(a.objective_value - b.objective_value) <= 2e-6);
}
