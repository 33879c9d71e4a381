#include "ksot/app/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>

namespace ksot::app {

namespace {

struct ExperimentName {
  Experiment e;
  const char* name;
};

constexpr ExperimentName kExperiments[] = {
    {Experiment::kEstimate, "estimate"},       {Experiment::kMap, "map"},
    {Experiment::kConstraint, "constraint"},   {Experiment::kConvergence, "convergence"},
    {Experiment::kGridSearch, "gridsearch"},   {Experiment::kWitness, "witness"},
    {Experiment::kMmdLimit, "mmd_limit"},
};

double parse_number(const std::string& text, const std::string& what) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    throw ConfigError(what + ": not a number: '" + text + "'");
  }
  if (used != text.size()) throw ConfigError(what + ": not a number: '" + text + "'");
  return v;
}

void require(bool ok, const std::string& message) {
  if (!ok) throw ConfigError(message);
}

void require_positive(const std::vector<double>& v, const std::string& what) {
  require(!v.empty(), what + " must not be empty");
  for (double x : v) require(std::isfinite(x) && x > 0.0, what + " entries must be positive");
}

std::vector<double> powers_of_ten(int first, int last) {
  std::vector<double> out;
  for (int k = first; k >= last; --k) out.push_back(std::pow(10.0, k));
  return out;
}

bool is_one_d(Experiment e) {
  return e == Experiment::kEstimate || e == Experiment::kMap || e == Experiment::kConstraint ||
         e == Experiment::kGridSearch;
}

}  // namespace

const char* to_string(Experiment e) {
  for (const auto& x : kExperiments)
    if (x.e == e) return x.name;
  return "unknown";
}

Experiment parse_experiment(const std::string& name) {
  for (const auto& x : kExperiments)
    if (name == x.name) return x.e;
  throw ConfigError("unknown experiment '" + name + "'");
}

KernelSpec KernelChoice::marginal(int d) const {
  if (family == Family::kGaussian) return KernelSpec::gaussian(parameter);
  return KernelSpec::sobolev(parameter, d);
}

KernelSpec KernelChoice::joint(int d) const {
  if (family == Family::kGaussian) return KernelSpec::gaussian(parameter);
  return KernelSpec::sobolev(parameter + 0.5 * d, 2 * d);
}

std::string KernelChoice::to_string() const {
  char buf[32];
  const auto end = std::to_chars(buf, buf + sizeof buf, parameter).ptr;
  return std::string(family == Family::kGaussian ? "gaussian:" : "sobolev:") + std::string(buf, end);
}

KernelChoice parse_kernel(const std::string& text) {
  const auto colon = text.find(':');
  require(colon != std::string::npos, "kernel must look like sobolev:<s> or gaussian:<sigma2>, got '" + text + "'");
  const std::string family = text.substr(0, colon);
  KernelChoice k;
  k.parameter = parse_number(text.substr(colon + 1), "kernel parameter");
  if (family == "gaussian") {
    k.family = KernelChoice::Family::kGaussian;
  } else if (family == "sobolev") {
    k.family = KernelChoice::Family::kSobolev;
  } else {
    throw ConfigError("unknown kernel family '" + family + "'");
  }
  require(std::isfinite(k.parameter) && k.parameter > 0.0, "kernel parameter must be positive");
  return k;
}

const char* to_string(LambdaMode m) {
  switch (m) {
    case LambdaMode::kAuto: return "auto";
    case LambdaMode::kFixed: return "fixed";
    case LambdaMode::kGrid: return "grid";
    case LambdaMode::kHeuristic: return "heuristic";
  }
  return "unknown";
}

LambdaMode parse_lambda_mode(const std::string& name) {
  for (auto m : {LambdaMode::kAuto, LambdaMode::kFixed, LambdaMode::kGrid, LambdaMode::kHeuristic})
    if (name == to_string(m)) return m;
  throw ConfigError("unknown lambda_mode '" + name + "'");
}

RunConfig config_from_json(const nlohmann::json& j) {
  require(j.is_object(), "config must be a JSON object");
  static const std::set<std::string> known{
      "experiment", "seed",       "threads",       "tau",         "out",          "kernel",
      "joint_kernel", "l",        "n",             "embedding",   "seeds",        "lambda_mode",
      "lambda1",    "lambda2",    "lambda1_grid",  "lambda2_grid", "shift",       "map_points",
      "map_lo",     "map_hi",     "constraint_grid", "potential", "witness_grid", "quad_nodes",
      "mmd_n",      "mmd_lambdas", "mc_samples"};
  for (const auto& item : j.items())
    require(known.count(item.key()) > 0, "unknown config key '" + item.key() + "'");

  RunConfig c;
  try {
    if (j.contains("experiment")) c.experiment = parse_experiment(j.at("experiment").get<std::string>());
    if (j.contains("lambda_mode")) c.lambda_mode = parse_lambda_mode(j.at("lambda_mode").get<std::string>());
    auto take = [&](const char* key, auto& field) {
      if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
    };
    auto take_opt = [&](const char* key, auto& field) {
      if (j.contains(key)) field = j.at(key).get<typename std::decay_t<decltype(field)>::value_type>();
    };
    take("seed", c.seed);
    take("threads", c.threads);
    take_opt("tau", c.tau);
    take("out", c.out);
    take_opt("kernel", c.kernel);
    take_opt("joint_kernel", c.joint_kernel);
    take_opt("l", c.l);
    if (j.contains("n")) {
      const auto& n = j.at("n");
      c.n = n.is_array() ? n.get<std::vector<std::size_t>>() : std::vector<std::size_t>{n.get<std::size_t>()};
    }
    take_opt("embedding", c.embedding);
    take("seeds", c.seeds);
    take_opt("lambda1", c.lambda1);
    take_opt("lambda2", c.lambda2);
    take("lambda1_grid", c.lambda1_grid);
    take("lambda2_grid", c.lambda2_grid);
    take("shift", c.shift);
    take("map_points", c.map_points);
    take("map_lo", c.map_lo);
    take("map_hi", c.map_hi);
    take("constraint_grid", c.constraint_grid);
    take("potential", c.potential);
    take("witness_grid", c.witness_grid);
    take("quad_nodes", c.quad_nodes);
    take("mmd_n", c.mmd_n);
    take("mmd_lambdas", c.mmd_lambdas);
    take("mc_samples", c.mc_samples);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), "cannot open config file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config file '" + path + "': " + e.what());
  }
  return config_from_json(j);
}

RunConfig resolve(RunConfig c) {
  const Experiment e = c.experiment;
  if (!c.tau) c.tau = e == Experiment::kMmdLimit ? 1e-9 : 1e-6;
  require(std::isfinite(*c.tau) && *c.tau > 0.0, "tau must be positive");
  require(c.threads >= 1, "threads must be at least 1");
  require(!c.out.empty(), "out must not be empty");

  if (!c.kernel) {
    if (e == Experiment::kConvergence) c.kernel = "gaussian:1";
    else if (e == Experiment::kMmdLimit) c.kernel = "sobolev:1.5";
    else c.kernel = "gaussian:0.1";
  }
  const KernelChoice k = parse_kernel(*c.kernel);
  c.kernel = k.to_string();
  if (c.joint_kernel) c.joint_kernel = parse_kernel(*c.joint_kernel).to_string();
  const int d = e == Experiment::kConvergence ? 4 : e == Experiment::kMmdLimit ? 2 : 1;
  try {
    (void)k.marginal(d);
    (void)(c.joint_kernel ? parse_kernel(*c.joint_kernel).marginal(2 * d) : k.joint(d));
  } catch (const Error& err) {
    throw ConfigError(std::string("kernel: ") + err.what());
  }

  if (!c.embedding) c.embedding = e == Experiment::kConvergence ? "sample" : "exact";
  require(*c.embedding == "exact" || *c.embedding == "sample", "embedding must be exact or sample");
  require(e != Experiment::kConvergence || *c.embedding == "sample",
          "the convergence experiment uses sample embeddings");

  if (c.n.empty()) {
    if (e == Experiment::kConvergence) c.n = {10, 25, 50};
    else if (*c.embedding == "sample") c.n = {128};
  }
  for (auto n : c.n) require(n >= 1, "n entries must be at least 1");
  require(c.seeds >= 1, "seeds must be at least 1");

  if (is_one_d(e) && !c.l) c.l = 128;
  if (c.l) require(*c.l >= 1, "l must be at least 1");
  require(!(e == Experiment::kConvergence && c.l), "the convergence experiment ties l to n (l = 100 + n)");

  require(c.lambda1.has_value() == c.lambda2.has_value(), "lambda1 and lambda2 must be given together");
  if (c.lambda1) {
    require(*c.lambda1 > 0.0 && *c.lambda2 > 0.0, "lambdas must be positive");
  }
  if (c.lambda_mode == LambdaMode::kAuto) {
    c.lambda_mode = e == Experiment::kGridSearch || !c.lambda1 ? LambdaMode::kGrid : LambdaMode::kFixed;
  }
  require(c.lambda_mode == LambdaMode::kGrid || e != Experiment::kGridSearch, "gridsearch needs lambda_mode grid");
  require(c.lambda_mode != LambdaMode::kFixed || c.lambda1.has_value(), "fixed lambda mode needs lambda1 and lambda2");
  require(c.lambda_mode != LambdaMode::kHeuristic || (e != Experiment::kWitness && e != Experiment::kMmdLimit),
          "heuristic lambdas apply to estimator runs");
  if (c.lambda_mode != LambdaMode::kFixed) {
    c.lambda1.reset();
    c.lambda2.reset();
  }
  if (c.lambda_mode == LambdaMode::kGrid && e != Experiment::kWitness && e != Experiment::kMmdLimit) {
    if (c.lambda1_grid.empty()) {
      c.lambda1_grid = e == Experiment::kConvergence ? std::vector<double>{1e-3} : powers_of_ten(-2, -6);
    }
    if (c.lambda2_grid.empty()) {
      if (e == Experiment::kConvergence) {
        for (int i = 0; i <= 16; ++i) c.lambda2_grid.push_back(std::pow(2.0, i / 8.0));
      } else {
        c.lambda2_grid = powers_of_ten(-1, -4);
      }
    }
    require_positive(c.lambda1_grid, "lambda1_grid");
    require_positive(c.lambda2_grid, "lambda2_grid");
  } else {
    c.lambda1_grid.clear();
    c.lambda2_grid.clear();
  }

  require(std::isfinite(c.shift) && c.shift >= 0.0, "shift must be non-negative");
  require(c.map_points >= 1, "map_points must be at least 1");
  require(c.map_lo < c.map_hi, "map_lo must be below map_hi");
  require(c.map_lo >= 0.0 && c.map_hi <= 1.0, "map range must lie in [0, 1]");
  require(c.constraint_grid >= 2, "constraint_grid must be at least 2");
  require(c.potential == "quartic" || c.potential == "exponential" || c.potential == "quadratic",
          "potential must be quartic, exponential or quadratic");
  require(c.witness_grid >= 2, "witness_grid must be at least 2");
  require(c.quad_nodes >= 2, "quad_nodes must be at least 2");
  require(c.mmd_n >= 1 && c.mmd_n <= 7, "mmd_n must lie in [1, 7]");
  if (c.mmd_lambdas.empty()) c.mmd_lambdas = powers_of_ten(-1, -4);
  require_positive(c.mmd_lambdas, "mmd_lambdas");
  require(c.mc_samples >= 2, "mc_samples must be at least 2");
  return c;
}

nlohmann::json canonical_json(const RunConfig& c) {
  nlohmann::json j;
  j["experiment"] = to_string(c.experiment);
  j["seed"] = c.seed;
  j["tau"] = *c.tau;
  j["kernel"] = c.kernel.value_or("");
  j["joint_kernel"] = c.joint_kernel ? nlohmann::json(*c.joint_kernel) : nlohmann::json(nullptr);
  j["l"] = c.l ? nlohmann::json(*c.l) : nlohmann::json(nullptr);
  j["n"] = c.n;
  j["embedding"] = c.embedding.value_or("");
  j["seeds"] = c.seeds;
  j["lambda_mode"] = to_string(c.lambda_mode);
  j["lambda1"] = c.lambda1 ? nlohmann::json(*c.lambda1) : nlohmann::json(nullptr);
  j["lambda2"] = c.lambda2 ? nlohmann::json(*c.lambda2) : nlohmann::json(nullptr);
  j["lambda1_grid"] = c.lambda1_grid;
  j["lambda2_grid"] = c.lambda2_grid;
  j["shift"] = c.shift;
  j["map_points"] = c.map_points;
  j["map_lo"] = c.map_lo;
  j["map_hi"] = c.map_hi;
  j["constraint_grid"] = c.constraint_grid;
  j["potential"] = c.potential;
  j["witness_grid"] = c.witness_grid;
  j["quad_nodes"] = c.quad_nodes;
  j["mmd_n"] = c.mmd_n;
  j["mmd_lambdas"] = c.mmd_lambdas;
  j["mc_samples"] = c.mc_samples;
  return j;
}

std::string run_id(const RunConfig& c) {
  const std::string text = canonical_json(c).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace ksot::app
