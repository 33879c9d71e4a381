// One line per primary acceptance criterion; exit status 1 if any fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "ksot/app/benchmarks.hpp"
#include "ksot/app/config.hpp"
#include "ksot/app/experiments.hpp"
#include "ksot/embeddings.hpp"
#include "ksot/kernels.hpp"
#include "ksot/linalg.hpp"
#include "ksot/mmd_ot.hpp"
#include "ksot/ot_estimator.hpp"
#include "ksot/parallel.hpp"
#include "ksot/sdp_solver.hpp"
#include "ksot/sos_witness.hpp"
#include "oracles.hpp"

using namespace ksot;

namespace {

// Tolerances and budgets.
constexpr double kExpTol = 1e-12;
constexpr double kMatern32Tol = 1e-10;
constexpr double kKernelSeconds = 1.0;

constexpr double kOracleTau = 1e-6;
constexpr double kOracleTol = 10.0 * kOracleTau;
constexpr double kOracleSeconds = 10.0;

constexpr double kOtIdentityTol = 1e-10;
constexpr double kGapRelTol = 1e-8;
constexpr double kResidualTol = 1e-6;
constexpr double kSosFloor = -1e-10;

constexpr double kGradRelTol = 1e-6;
constexpr double kHessRelTol = 1e-5;
constexpr double kPotentialGradTol = 1e-5;

constexpr double kShift = 0.3;
constexpr double kOtTol = 0.02;
constexpr double kMapTol = 0.05;
constexpr double kBenchmarkSeconds = 120.0;

constexpr double kMmdTau = 1e-9;
constexpr double kMonotoneSlack = 1e-9;
constexpr double kMmdGap = 1e-2;
constexpr double kMmdSeconds = 60.0;

constexpr double kQuadraticSosTol = 1e-12;
constexpr double kQuarticSosTol = 1e-8;
constexpr double kWitnessSeconds = 10.0;

constexpr double kConvergenceSeconds = 30.0 * 60.0;
constexpr double kEmbeddingSeconds = 60.0;

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

// 2^{1-nu} / Gamma(nu) r^nu K_nu(r), independent of the library's evaluation.
double matern_bessel(double nu, double r) {
  return std::pow(2.0, 1.0 - nu) / std::tgamma(nu) * std::pow(r, nu) * std::cyl_bessel_k(nu, r);
}

Outcome kernel_closed_forms() {
  double worst_exp = 0.0, worst_m32 = 0.0;
  for (int d = 1; d <= 4; ++d) {
    const KernelSpec half = KernelSpec::sobolev(0.5 * d + 0.5, d);
    const KernelSpec three_half = KernelSpec::sobolev(0.5 * d + 1.5, d);
    for (int i = 0; i <= 2000; ++i) {
      const double r = 1e-3 * std::pow(1e4, i / 2000.0);
      worst_exp = std::max(worst_exp, std::abs(half.profile(r) - std::exp(-r)));
      worst_m32 = std::max(worst_m32, std::abs(three_half.profile(r) - (1.0 + r) * std::exp(-r)));
      worst_exp = std::max(worst_exp, std::abs(matern_bessel(0.5, r) - std::exp(-r)));
      worst_m32 = std::max(worst_m32, std::abs(matern_bessel(1.5, r) - (1.0 + r) * std::exp(-r)));
    }
  }
  return {worst_exp <= kExpTol && worst_m32 <= kMatern32Tol,
          "kernel and Bessel form vs closed forms, d = 1..4: max |k - e^-r| " + fmt("%.1e", worst_exp) + ", max |k - (1+r)e^-r| " + fmt("%.1e", worst_m32)};
}

Outcome solver_oracle() {
  std::mt19937_64 rng(2024);
  double worst = 0.0;
  int failures = 0;
  for (int i = 0; i < 25; ++i) {
    const DualData d = testing::random_dual(rng, 1 + i % 2);
    const DualSolution sol = solve_dual(d, kOracleTau);
    const double err = std::abs(sol.objective_value - testing::grid_oracle(d));
    worst = std::max(worst, err);
    if (err > kOracleTol || !sol.converged) ++failures;
  }
  return {failures == 0, "25 instances, max |F - oracle| " + fmt("%.2e", worst) + ", failures " +
                             std::to_string(failures)};
}

Outcome identities() {
  struct Run {
    std::size_t l;
    double l1, l2;
  };
  const std::vector<Run> runs{{16, 1e-1, 1e-1}, {16, 1e-2, 1.0},  {32, 1e-2, 1e-1}, {32, 1e-1, 1e-1},
                              {32, 1e-2, 1.0},  {64, 1e-2, 1e-1}, {64, 1e-1, 1.0},  {64, 1e-3, 1.0}};
  double ot_id = 0.0, gap_rel = 0.0, residual = 0.0, sos_min = std::numeric_limits<double>::infinity();
  int not_converged = 0;
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u01;
  for (const Run& r : runs) {
    const OtProblem p = testing::smooth_translation_problem(r.l);
    const OtFit f = fit(p, r.l1, r.l2, 1e-6);
    const OTEstimate& e = f.estimate;
    if (!e.converged) ++not_converged;
    ot_id = std::max(ot_id, std::abs(e.value - potential_embedding_inner(f.u) - potential_embedding_inner(f.v)));
    gap_rel = std::max(gap_rel, std::abs(e.duality_gap - e.delta_final) / (1.0 + std::abs(e.dual_objective)));
    residual = std::max(residual, e.constraint_residual_max);
    for (int i = 0; i < 1000; ++i) {
      const Point x = Point::Constant(1, u01(rng)), y = Point::Constant(1, kShift + u01(rng));
      sos_min = std::min(sos_min, f.constraint.sos_value(x, y));
    }
  }
  const bool pass = not_converged == 0 && ot_id <= kOtIdentityTol && gap_rel <= kGapRelTol &&
                    residual <= kResidualTol && sos_min >= kSosFloor;
  return {pass, std::to_string(runs.size()) + " runs (l <= 64): OT identity " + fmt("%.1e", ot_id) +
                    ", gap-delta rel " + fmt("%.1e", gap_rel) + ", residual " + fmt("%.1e", residual) +
                    ", min SoS " + fmt("%.1e", sos_min) + ", not converged " + std::to_string(not_converged)};
}

Outcome gradients() {
  std::mt19937_64 rng(8);
  double grad_rel = 0.0, hess_rel = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    const DualData d = testing::random_dual(rng, 8);
    std::normal_distribution<double> n01;
    Eigen::VectorXd g = Eigen::VectorXd::NullaryExpr(8, [&] { return 0.3 * n01(rng); });
    while (check_feasible(g, d.Phi(), d.lambda1) <= 0.05 * d.lambda1) g *= 0.5;
    const double delta = 0.3, h = 1e-6;
    const auto [grad, hess] = barrier_derivatives(d, g, delta);
    Eigen::VectorXd fd_grad(8);
    Eigen::MatrixXd fd_hess(8, 8);
    for (int i = 0; i < 8; ++i) {
      Eigen::VectorXd a = g, b = g;
      a[i] += h;
      b[i] -= h;
      fd_grad[i] = (barrier_objective(d, a, delta) - barrier_objective(d, b, delta)) / (2 * h);
      fd_hess.col(i) = (barrier_derivatives(d, a, delta).first - barrier_derivatives(d, b, delta).first) / (2 * h);
    }
    grad_rel = std::max(grad_rel, (grad - fd_grad).norm() / grad.norm());
    hess_rel = std::max(hess_rel, (hess - fd_hess).norm() / hess.norm());
  }
  const OtProblem p = testing::smooth_translation_problem(32);
  const OtFit f = fit(p, 1e-2, 1e-1, 1e-6);
  std::uniform_real_distribution<double> u(0.02, 0.98);
  double pot = 0.0;
  for (int i = 0; i < 100; ++i) {
    const Point x = Point::Constant(1, u(rng));
    const double h = 1e-5;
    const double fd = (f.u.value(x + Point::Constant(1, h)) - f.u.value(x - Point::Constant(1, h))) / (2 * h);
    const double g = f.u.gradient(x)[0];
    pot = std::max(pot, std::abs(g - fd) / std::max(1.0, std::abs(g)));
  }
  return {grad_rel <= kGradRelTol && hess_rel <= kHessRelTol && pot <= kPotentialGradTol,
          "barrier gradient rel " + fmt("%.1e", grad_rel) + ", Hessian rel " + fmt("%.1e", hess_rel) +
              ", potential gradient rel " + fmt("%.1e", pot)};
}

Outcome translation_benchmark() {
  const app::TranslationBenchmark bench{kShift};
  const KernelSpec k = KernelSpec::gaussian(0.1);
  const OtProblem p = bench.problem(128, k, k, true);
  const std::vector<double> l1s{1e-2, 1e-3, 1e-4, 1e-5, 1e-6}, l2s{1e-1, 1e-2, 1e-3, 1e-4};
  const GridSearchResult g = grid_search(p, l1s, l2s, bench.reference(), 1e-6, default_threads());
  if (!g.best) return {false, "no converged grid cell"};
  const GridCell& best = g.cells[*g.best];
  const OtFit f = fit(p, best.lambda1, best.lambda2, 1e-6);
  double map_err = 0.0;
  for (int i = 0; i < 50; ++i) {
    const double x = 0.1 + 0.8 * i / 49.0;
    map_err += std::abs(transport_map(f.u, Point::Constant(1, x))[0] - (x + kShift)) / 50.0;
  }
  const double ot_err = std::abs(f.estimate.value - bench.reference());
  return {ot_err <= kOtTol && map_err <= kMapTol,
          "lambda = (" + fmt("%g", best.lambda1) + ", " + fmt("%g", best.lambda2) + "), |OT - 0.045| " +
              fmt("%.1e", ot_err) + ", mean map error " + fmt("%.1e", map_err)};
}

Outcome mmd_limit() {
  const KernelSpec kx = KernelSpec::sobolev(1.5, 2), kxy = KernelSpec::sobolev(2.5, 4);
  int failures = 0;
  double worst_gap = 0.0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const PointList xs = uniform_points(Domain::cube(2, 0.0, 1.0), 3, app::stream(seed, 2, 0)());
    const PointList ys = uniform_points(Domain::cube(2, 0.5, 1.5), 3, app::stream(seed, 2, 1)());
    const double oracle = exact_ot_oracle(xs, ys);
    double previous = -std::numeric_limits<double>::infinity();
    bool ok = true;
    for (double lam : {1e-1, 1e-2, 1e-3, 1e-4}) {
      const PlanSolution s = build_and_solve_mmd_ot(xs, ys, kx, kx, kxy, lam, lam, kMmdTau);
      ok = ok && s.objective >= previous - kMonotoneSlack;
      previous = s.objective;
    }
    const double gap = std::abs(oracle - previous);
    worst_gap = std::max(worst_gap, gap);
    if (!ok || gap > kMmdGap) ++failures;
  }
  return {failures == 0, "5 instances, n = 3, final |objective - oracle| <= " + fmt("%.1e", worst_gap) +
                             ", failures " + std::to_string(failures)};
}

Outcome sos_witness() {
  const double q1 = verify_sos_identity(app::diagonal_quadratic_potential(Eigen::VectorXd::Constant(1, 2.0)), 20, 32);
  const double q2 = verify_sos_identity(app::diagonal_quadratic_potential(Eigen::Vector2d(2.0, 4.0)), 8, 32);
  const double quartic = verify_sos_identity(app::quartic_potential(), 20, 32);
  return {std::max(q1, q2) <= kQuadraticSosTol && quartic <= kQuarticSosTol,
          "quadratic residual " + fmt("%.1e", std::max(q1, q2)) + ", quartic (20x20, 32 nodes) " +
              fmt("%.1e", quartic)};
}

Outcome convergence_trend() {
  app::RunConfig c;
  c.experiment = app::Experiment::kConvergence;
  c.out = (std::filesystem::temp_directory_path() / "ksot_acceptance").string();
  c.threads = default_threads();
  c = app::resolve(c);
  std::ostringstream log;
  const app::RunOutcome r = app::run_experiment(c, log);
  std::ifstream in(r.directory / "convergence.json");
  const auto j = nlohmann::json::parse(in);
  std::vector<double> medians;
  std::string detail = "median |OT - ref|:";
  for (const auto& row : j["per_n"]) {
    if (!row.contains("median_abs_error") || row["median_abs_error"].is_null()) return {false, "no eligible cell"};
    medians.push_back(row["median_abs_error"].get<double>());
    detail += " n=" + std::to_string(row["n"].get<int>()) + " " + fmt("%.2e", medians.back()) +
              " (lambda2 " + fmt("%.3g", row["lambda2"].get<double>()) + ")";
  }
  bool trend = r.exit_code == 0;
  for (std::size_t i = 1; i < medians.size(); ++i) trend = trend && medians[i] <= medians[i - 1];
  return {trend, detail};
}

Outcome embedding_statistics() {
  const KernelSpec k = KernelSpec::gaussian(0.1);
  const Domain dom = Domain::cube(1, 0.0, 1.0);
  const EmbeddingEstimate exact = exact_embedding(MeasureSpec{MeasureSpec::UniformBox{}, dom}, k);
  std::vector<double> medians;
  for (std::size_t n : {10, 100, 1000}) {
    std::vector<double> devs;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const EmbeddingEstimate est = sample_embedding(uniform_points(dom, n, app::stream(seed, 3, n)()), k);
      double sup = 0.0;
      for (int i = 0; i < 20; ++i) {
        const Point p = Point::Constant(1, i / 19.0);
        sup = std::max(sup, std::abs(est.value(p) - exact.value(p)));
      }
      devs.push_back(sup);
    }
    medians.push_back(median(devs));
  }
  return {medians[1] < medians[0] && medians[2] < medians[1],
          "median sup deviation n=10 " + fmt("%.2e", medians[0]) + ", n=100 " + fmt("%.2e", medians[1]) +
              ", n=1000 " + fmt("%.2e", medians[2])};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<Outcome()> run;
    double budget_seconds;
  };
  const std::vector<Criterion> criteria{
      {"kernel_closed_forms", kernel_closed_forms, kKernelSeconds},
      {"solver_oracle_equivalence", solver_oracle, kOracleSeconds},
      {"exact_arithmetic_identities", identities, 1e9},
      {"gradient_hessian_checks", gradients, 1e9},
      {"closed_form_translation", translation_benchmark, kBenchmarkSeconds},
      {"mmd_ot_limit", mmd_limit, kMmdSeconds},
      {"sos_witness", sos_witness, kWitnessSeconds},
      {"convergence_trend_4d", convergence_trend, kConvergenceSeconds},
      {"embedding_statistics", embedding_statistics, kEmbeddingSeconds},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs < c.budget_seconds;
    const bool pass = o.pass && in_time;
    if (!pass) ++failed;
    std::printf("%s %-28s %s; %.1f s%s\n", pass ? "PASS" : "FAIL", c.name, o.detail.c_str(), secs,
                in_time ? "" : " (over budget)");
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
