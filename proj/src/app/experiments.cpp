#include "ksot/app/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "ksot/app/benchmarks.hpp"
#include "ksot/app/output.hpp"
#include "ksot/mmd_ot.hpp"
#include "ksot/parallel.hpp"

namespace ksot::app {

namespace {

using nlohmann::json;

const char* status_of(bool ok) { return ok ? "ok" : "not_converged"; }

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

KernelSpec joint_kernel(const RunConfig& c, int d) {
  if (c.joint_kernel) return parse_kernel(*c.joint_kernel).marginal(2 * d);
  return parse_kernel(*c.kernel).joint(d);
}

json estimate_json(const OTEstimate& e, double reference) {
  return {{"schema_version", kSchemaVersion},
          {"ot_hat", e.value},
          {"reference", reference},
          {"abs_error", std::abs(e.value - reference)},
          {"lambda1", e.lambda1},
          {"lambda2", e.lambda2},
          {"delta_final", e.delta_final},
          {"duality_gap", e.duality_gap},
          {"dual_objective", e.dual_objective},
          {"primal_objective", e.primal_objective},
          {"constraint_residual_max", e.constraint_residual_max},
          {"newton_iterations", e.newton_iterations},
          {"outer_iterations", e.outer_iterations},
          {"final_decrement", e.final_decrement},
          {"converged", e.converged}};
}

// One fit of the 1D translation benchmark with the configured lambda rule.
struct TranslationFit {
  TranslationBenchmark bench;
  OtProblem problem;
  std::optional<OtFit> fit;
  std::optional<GridSearchResult> grid;
};

TranslationFit fit_translation(const RunConfig& c, bool need_fit, std::ostream& log) {
  const TranslationBenchmark bench{c.shift};
  const KernelChoice k = parse_kernel(*c.kernel);
  const bool exact = *c.embedding == "exact";
  const std::size_t n = exact ? 0 : c.n.front();
  TranslationFit out{bench, bench.problem(*c.l, k.marginal(1), joint_kernel(c, 1), exact, n, c.seed),
                     std::nullopt, std::nullopt};

  double l1 = 0.0, l2 = 0.0;
  switch (c.lambda_mode) {
    case LambdaMode::kFixed:
      l1 = *c.lambda1;
      l2 = *c.lambda2;
      break;
    case LambdaMode::kHeuristic: {
      const std::size_t count = exact ? *c.l : n;
      std::tie(l1, l2) = select_lambdas(LambdaScenario::kHeuristic, *c.l, count, count, 2, 1);
      break;
    }
    default: {
      log << "grid search over " << c.lambda1_grid.size() * c.lambda2_grid.size() << " cells\n";
      out.grid = grid_search(out.problem, c.lambda1_grid, c.lambda2_grid, out.bench.reference(), *c.tau,
                             c.threads);
      if (!out.grid->best) return out;
      l1 = out.grid->cells[*out.grid->best].lambda1;
      l2 = out.grid->cells[*out.grid->best].lambda2;
    }
  }
  if (need_fit) {
    log << "fit at lambda1 = " << l1 << ", lambda2 = " << l2 << "\n";
    out.fit = fit(out.problem, l1, l2, *c.tau);
  }
  return out;
}

std::string run_translation(const RunConfig& c, RunDirectory& dir, std::ostream& log) {
  TranslationFit tf = fit_translation(c, true, log);
  if (!tf.fit) {
    write_json(dir.file("estimate.json"), {{"schema_version", kSchemaVersion}, {"error", "no converged grid cell"}});
    dir.record_json("estimate.json");
    return status_of(false);
  }
  const OtFit& f = *tf.fit;
  write_json(dir.file("estimate.json"), estimate_json(f.estimate, tf.bench.reference()));
  dir.record_json("estimate.json");

  if (c.experiment == Experiment::kMap) {
    CsvWriter csv(dir.file("map.csv"), {"x", "t_hat"});
    for (int i = 0; i < c.map_points; ++i) {
      const double x = c.map_points == 1 ? c.map_lo : c.map_lo + (c.map_hi - c.map_lo) * i / (c.map_points - 1);
      csv.row({x, transport_map(f.u, Point::Constant(1, x))[0]});
    }
    dir.record_csv("map.csv", csv);
  } else if (c.experiment == Experiment::kConstraint) {
    CsvWriter csv(dir.file("constraint.csv"), {"x", "y", "h_hat", "sos"});
    const Domain dx = tf.bench.domain_x(), dy = tf.bench.domain_y();
    const int g = c.constraint_grid;
    for (int i = 0; i < g; ++i) {
      const double x = dx.bounds[0].first + (dx.bounds[0].second - dx.bounds[0].first) * i / (g - 1);
      for (int j = 0; j < g; ++j) {
        const double y = dy.bounds[0].first + (dy.bounds[0].second - dy.bounds[0].first) * j / (g - 1);
        const auto h = constraint_function(f.u, f.v, &f.constraint, Point::Constant(1, x), Point::Constant(1, y));
        csv.row({x, y, h.h, *h.sos});
      }
    }
    dir.record_csv("constraint.csv", csv);
  }
  return status_of(f.estimate.converged);
}

std::string run_gridsearch(const RunConfig& c, RunDirectory& dir, std::ostream& log) {
  const TranslationFit tf = fit_translation(c, false, log);
  const GridSearchResult& g = *tf.grid;
  CsvWriter csv(dir.file("gridsearch.csv"), {"lambda1", "lambda2", "ot_hat", "duality_gap", "residual_max"});
  json cells = json::array();
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (const auto& cell : g.cells) {
    const auto& e = cell.estimate;
    csv.row({cell.lambda1, cell.lambda2, e ? e->value : nan, e ? e->duality_gap : nan,
             e ? e->constraint_residual_max : nan});
    cells.push_back({{"lambda1", cell.lambda1},
                     {"lambda2", cell.lambda2},
                     {"converged", e ? e->converged : false},
                     {"error", cell.error}});
  }
  dir.record_csv("gridsearch.csv", csv);
  json summary{{"schema_version", kSchemaVersion}, {"reference", tf.bench.reference()}, {"cells", cells}};
  if (g.best) {
    const auto& b = g.cells[*g.best];
    summary["best"] = {{"lambda1", b.lambda1}, {"lambda2", b.lambda2}, {"ot_hat", b.estimate->value},
                       {"abs_error", std::abs(b.estimate->value - tf.bench.reference())}};
  } else {
    summary["best"] = nullptr;
  }
  write_json(dir.file("gridsearch.json"), summary);
  dir.record_json("gridsearch.json");
  return status_of(g.best.has_value());
}

std::string run_convergence(const RunConfig& c, RunDirectory& dir, std::ostream& log) {
  const GaussianMapBenchmark bench;
  const KernelChoice k = parse_kernel(*c.kernel);
  const KernelSpec kx = k.marginal(GaussianMapBenchmark::kDim);
  const KernelSpec kxy = joint_kernel(c, GaussianMapBenchmark::kDim);
  log << "monte carlo reference with " << c.mc_samples << " samples\n";
  const McReference ref = monte_carlo_reference(bench, c.mc_samples, c.seed);

  CsvWriter rows(dir.file("convergence.csv"), {"n", "seed", "ot_hat", "reference", "abs_error"});
  CsvWriter all(dir.file("convergence_grid.csv"),
                {"n", "seed", "lambda1", "lambda2", "ot_hat", "abs_error", "converged"});
  json per_n = json::array();
  bool ok = true;
  const auto seeds = static_cast<std::size_t>(c.seeds);

  for (std::size_t n : c.n) {
    std::vector<std::pair<double, double>> cells;
    if (c.lambda_mode == LambdaMode::kFixed) {
      cells.emplace_back(*c.lambda1, *c.lambda2);
    } else if (c.lambda_mode == LambdaMode::kHeuristic) {
      cells.push_back(select_lambdas(LambdaScenario::kHeuristic, 100 + n, n, n, 2, 1));
    } else {
      for (double l1 : c.lambda1_grid)
        for (double l2 : c.lambda2_grid) cells.emplace_back(l1, l2);
    }
    log << "n = " << n << ": " << seeds << " seeds x " << cells.size() << " cells\n";

    std::vector<std::optional<OtProblem>> problems(seeds);
    std::vector<DualData> bases(seeds);
    parallel_for(seeds, c.threads, [&](std::size_t s) {
      problems[s] = bench.problem(n, c.seed, s, kx, kxy);
      bases[s] = base_dual_data(*problems[s]);
    });
    struct Result {
      double value = std::numeric_limits<double>::quiet_NaN();
      bool converged = false;
    };
    std::vector<Result> results(seeds * cells.size());
    parallel_for(results.size(), c.threads, [&](std::size_t i) {
      const std::size_t s = i / cells.size(), j = i % cells.size();
      try {
        const OTEstimate e = fit(*problems[s], bases[s], cells[j].first, cells[j].second, *c.tau).estimate;
        results[i] = {e.value, e.converged};
      } catch (const Error&) {
        results[i] = {};
      }
    });

    // A cell is eligible when every seed converged; the best has the smallest
    // mean absolute error over the seeds.
    std::optional<std::size_t> best;
    double best_mae = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < cells.size(); ++j) {
      double mae = 0.0;
      bool eligible = true;
      for (std::size_t s = 0; s < seeds; ++s) {
        const Result& r = results[s * cells.size() + j];
        eligible = eligible && r.converged;
        mae += std::abs(r.value - ref.value) / static_cast<double>(seeds);
      }
      if (eligible && mae < best_mae) {
        best_mae = mae;
        best = j;
      }
    }
    for (std::size_t s = 0; s < seeds; ++s)
      for (std::size_t j = 0; j < cells.size(); ++j) {
        const Result& r = results[s * cells.size() + j];
        all.row({static_cast<long long>(n), static_cast<long long>(c.seed + s), cells[j].first, cells[j].second,
                 r.value, std::abs(r.value - ref.value), static_cast<long long>(r.converged)});
      }
    if (!best) {
      ok = false;
      per_n.push_back({{"n", n}, {"l", 100 + n}, {"selected", nullptr}});
      continue;
    }
    std::vector<double> errors;
    for (std::size_t s = 0; s < seeds; ++s) {
      const double v = results[s * cells.size() + *best].value;
      errors.push_back(std::abs(v - ref.value));
      rows.row({static_cast<long long>(n), static_cast<long long>(c.seed + s), v, ref.value, errors.back()});
    }
    per_n.push_back({{"n", n},
                     {"l", 100 + n},
                     {"lambda1", cells[*best].first},
                     {"lambda2", cells[*best].second},
                     {"mean_abs_error", best_mae},
                     {"median_abs_error", median(errors)}});
    log << "  lambda = (" << cells[*best].first << ", " << cells[*best].second << "), median error "
        << median(errors) << "\n";
  }
  dir.record_csv("convergence.csv", rows);
  dir.record_csv("convergence_grid.csv", all);
  write_json(dir.file("convergence.json"), {{"schema_version", kSchemaVersion},
                                            {"reference", ref.value},
                                            {"reference_std_error", ref.std_error},
                                            {"reference_samples", ref.samples},
                                            {"closed_form_reference", bench.closed_form_reference()},
                                            {"per_n", per_n}});
  dir.record_json("convergence.json");
  return status_of(ok);
}

std::string run_witness(const RunConfig& c, RunDirectory& dir, std::ostream& log) {
  const PotentialSpec spec = c.potential == "quartic"     ? quartic_potential()
                             : c.potential == "exponential" ? exponential_potential()
                                                            : diagonal_quadratic_potential(Eigen::Vector2d(2.0, 4.0));
  validate_potential(spec);
  CsvWriter csv(dir.file("witness.csv"), {"quad_nodes", "max_residual"});
  std::vector<int> nodes;
  for (int q = 2; q < c.quad_nodes; q *= 2) nodes.push_back(q);
  nodes.push_back(c.quad_nodes);
  double residual = 0.0;
  for (int q : nodes) {
    residual = verify_sos_identity(spec, c.witness_grid, q, c.threads);
    log << "quad_nodes = " << q << ": max residual " << residual << "\n";
    csv.row({static_cast<long long>(q), residual});
  }
  dir.record_csv("witness.csv", csv);
  write_json(dir.file("witness.json"), {{"schema_version", kSchemaVersion},
                                        {"potential", c.potential},
                                        {"dim", spec.domain_x.dim()},
                                        {"grid_per_dim", c.witness_grid},
                                        {"quad_nodes", c.quad_nodes},
                                        {"max_residual", residual}});
  dir.record_json("witness.json");
  return status_of(true);
}

std::string run_mmd_limit(const RunConfig& c, RunDirectory& dir, std::ostream& log) {
  const int d = 2;
  const auto n = static_cast<std::size_t>(c.mmd_n);
  const PointList xs = uniform_points(Domain::cube(d, 0.0, 1.0), n, stream(c.seed, 2, 0)());
  const PointList ys = uniform_points(Domain::cube(d, 0.5, 1.5), n, stream(c.seed, 2, 1)());
  const KernelSpec kx = parse_kernel(*c.kernel).marginal(d);
  const KernelSpec kxy = joint_kernel(c, d);
  const double oracle = exact_ot_oracle(xs, ys);

  CsvWriter csv(dir.file("mmd_limit.csv"),
                {"lambda", "objective", "oracle", "gap", "row_residual_max", "col_residual_max", "converged"});
  bool all_converged = true, monotone = true;
  double previous = -std::numeric_limits<double>::infinity(), last = 0.0;
  std::vector<double> lambdas = c.mmd_lambdas;
  std::sort(lambdas.begin(), lambdas.end(), std::greater<>());
  for (double lam : lambdas) {
    const PlanSolution s = build_and_solve_mmd_ot(xs, ys, kx, kx, kxy, lam, lam, *c.tau);
    log << "lambda = " << lam << ": objective " << s.objective << "\n";
    csv.row({lam, s.objective, oracle, oracle - s.objective, s.row_residual.cwiseAbs().maxCoeff(),
             s.col_residual.cwiseAbs().maxCoeff(), static_cast<long long>(s.solver.converged)});
    all_converged = all_converged && s.solver.converged;
    monotone = monotone && s.objective >= previous - 1e-9;
    previous = last = s.objective;
  }
  dir.record_csv("mmd_limit.csv", csv);
  write_json(dir.file("mmd_limit.json"), {{"schema_version", kSchemaVersion},
                                          {"oracle", oracle},
                                          {"final_gap", oracle - last},
                                          {"monotone", monotone},
                                          {"converged", all_converged}});
  dir.record_json("mmd_limit.json");
  return status_of(all_converged);
}

}  // namespace

RunOutcome run_experiment(const RunConfig& c, std::ostream& log) {
  RunDirectory dir(c.out, to_string(c.experiment), run_id(c));
  std::string status;
  switch (c.experiment) {
    case Experiment::kEstimate:
    case Experiment::kMap:
    case Experiment::kConstraint: status = run_translation(c, dir, log); break;
    case Experiment::kGridSearch: status = run_gridsearch(c, dir, log); break;
    case Experiment::kConvergence: status = run_convergence(c, dir, log); break;
    case Experiment::kWitness: status = run_witness(c, dir, log); break;
    case Experiment::kMmdLimit: status = run_mmd_limit(c, dir, log); break;
  }
  dir.write_manifest(status, canonical_json(c));
  return {status == "ok" ? 0 : 2, status, dir.path()};
}

}  // namespace ksot::app
