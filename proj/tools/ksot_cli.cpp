#include <iostream>

#include <CLI11.hpp>

#include "ksot/app/config.hpp"
#include "ksot/app/experiments.hpp"
#include "ksot/app/output.hpp"
#include "ksot/parallel.hpp"

using namespace ksot::app;

namespace {

int fail(const std::string& kind, const std::string& message, int code) {
  std::cerr << error_record(kind, message).dump() << std::endl;
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App cli{"Kernel sum-of-squares optimal transport estimator"};
  std::string experiment, config_path, out, kernel;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::optional<double> tau, lambda1, lambda2, sigma2;
  std::optional<std::size_t> l;
  std::vector<std::size_t> n;
  bool quiet = false;

  cli.add_option("--experiment", experiment,
                 "estimate | map | constraint | convergence | gridsearch | witness | mmd_limit");
  cli.add_option("--config", config_path, "JSON config file; flags override its entries");
  cli.add_option("--out", out, "output root directory (default: runs)");
  cli.add_option("--seed", seed, "random seed");
  cli.add_option("--threads", threads, "worker threads (default: hardware concurrency)");
  cli.add_option("--tau", tau, "target barrier precision");
  cli.add_option("--l", l, "number of fill pairs");
  cli.add_option("--n", n, "sample counts (repeat or comma-separate for convergence)")->delimiter(',');
  cli.add_option("--lambda1", lambda1, "fixed lambda1 (with --lambda2)");
  cli.add_option("--lambda2", lambda2, "fixed lambda2 (with --lambda1)");
  cli.add_option("--sigma2", sigma2, "shorthand for --kernel gaussian:<sigma2>");
  cli.add_option("--kernel", kernel, "sobolev:<s> or gaussian:<sigma2>");
  cli.add_flag("--quiet", quiet, "no progress output");

  try {
    cli.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return cli.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail("config", e.what(), 1);
  }

  RunOutcome outcome;
  try {
    RunConfig c = config_path.empty() ? RunConfig{} : load_config(config_path);
    if (!experiment.empty()) c.experiment = parse_experiment(experiment);
    else if (config_path.empty()) throw ConfigError("--experiment is required");
    c.threads = ksot::default_threads();
    if (threads) c.threads = *threads;
    if (!out.empty()) c.out = out;
    if (seed) c.seed = *seed;
    if (tau) c.tau = *tau;
    if (l) c.l = *l;
    if (!n.empty()) c.n = n;
    if (lambda1) c.lambda1 = *lambda1;
    if (lambda2) c.lambda2 = *lambda2;
    if (lambda1 && lambda2) c.lambda_mode = LambdaMode::kAuto;
    if (sigma2 && !kernel.empty()) throw ConfigError("--sigma2 and --kernel are exclusive");
    if (sigma2) c.kernel = KernelChoice{KernelChoice::Family::kGaussian, *sigma2}.to_string();
    if (!kernel.empty()) c.kernel = kernel;
    c = resolve(c);

    std::ostream null_stream(nullptr);
    outcome = run_experiment(c, quiet ? null_stream : std::cerr);
  } catch (const ConfigError& e) {
    return fail("config", e.what(), 1);
  } catch (const ksot::SolverError& e) {
    return fail("solver", e.what(), 2);
  } catch (const ksot::Error& e) {
    return fail("config", e.what(), 1);
  } catch (const std::exception& e) {
    return fail("internal", e.what(), 1);
  }
  std::cout << outcome.directory.string() << std::endl;
  if (outcome.exit_code != 0) {
    return fail("solver", "solver did not converge; outputs in " + outcome.directory.string(), outcome.exit_code);
  }
  return 0;
}
