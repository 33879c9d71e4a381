#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ksot/errors.hpp"
#include "ksot/kernels.hpp"

namespace ksot::app {

/// Invalid or inconsistent run configuration (exit code 1).
class ConfigError : public Error {
 public:
  using Error::Error;
};

enum class Experiment { kEstimate, kMap, kConstraint, kConvergence, kGridSearch, kWitness, kMmdLimit };

const char* to_string(Experiment e);
Experiment parse_experiment(const std::string& name);

/// "sobolev:<s>" or "gaussian:<sigma2>".
struct KernelChoice {
  enum class Family { kSobolev, kGaussian } family = Family::kGaussian;
  double parameter = 0.1;

  /// Kernel on a d-dimensional marginal space.
  KernelSpec marginal(int d) const;
  /// Default joint kernel on the 2d-dimensional product: same Gaussian, or
  /// Sobolev order raised by d/2.
  KernelSpec joint(int d) const;
  std::string to_string() const;
};

KernelChoice parse_kernel(const std::string& text);

/// How the regularization pair is chosen. kAuto means fixed when both
/// lambdas are given, grid search otherwise.
enum class LambdaMode { kAuto, kFixed, kGrid, kHeuristic };

const char* to_string(LambdaMode m);
LambdaMode parse_lambda_mode(const std::string& name);

/// Every field is optional in the config file; unset ones are filled per
/// experiment by resolve().
struct RunConfig {
  Experiment experiment = Experiment::kEstimate;
  std::uint64_t seed = 0;
  int threads = 1;
  std::optional<double> tau;  // 1e-6, or 1e-9 for mmd_limit
  std::string out = "runs";

  std::optional<std::string> kernel;
  std::optional<std::string> joint_kernel;
  std::optional<std::size_t> l;
  std::vector<std::size_t> n;
  std::optional<std::string> embedding;  // exact | sample
  int seeds = 20;

  LambdaMode lambda_mode = LambdaMode::kAuto;
  std::optional<double> lambda1;
  std::optional<double> lambda2;
  std::vector<double> lambda1_grid;
  std::vector<double> lambda2_grid;

  double shift = 0.3;
  int map_points = 50;
  double map_lo = 0.1;
  double map_hi = 0.9;
  int constraint_grid = 41;

  std::string potential = "quartic";  // quartic | exponential | quadratic
  int witness_grid = 20;
  int quad_nodes = 32;

  int mmd_n = 3;
  std::vector<double> mmd_lambdas;

  std::size_t mc_samples = 1000000;
};

/// Reads a JSON config; unknown keys are rejected.
RunConfig config_from_json(const nlohmann::json& j);
RunConfig load_config(const std::string& path);

/// Fills experiment defaults and validates. Throws ConfigError.
RunConfig resolve(RunConfig c);

/// Canonical JSON of a resolved config (threads and out excluded: they do
/// not change results).
nlohmann::json canonical_json(const RunConfig& c);

/// 16 hex digits of FNV-1a over the canonical JSON text.
std::string run_id(const RunConfig& c);

}  // namespace ksot::app
