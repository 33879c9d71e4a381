#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "ksot/embeddings.hpp"
#include "ksot/geometry.hpp"
#include "ksot/kernels.hpp"
#include "ksot/sdp_solver.hpp"

namespace ksot {

/// u(p) = (w(p) - sum_j gamma_j k(anchor_j, p)) / (2 lambda2).
struct PotentialModel {
  Eigen::VectorXd gamma;
  double lambda2 = 1.0;
  EmbeddingEstimate embedding;
  KernelSpec kernel;
  PointList anchors;

  double value(const Point& p) const;
  Eigen::VectorXd values(const PointList& ps) const;
  Eigen::VectorXd gradient(const Point& p) const;
};

/// PSD operator of the primal SoS constraint, in feature coordinates (B) and
/// in kernel-column coordinates (C = R^{-1} B R^{-T}).
struct ConstraintModel {
  Eigen::MatrixXd B;
  Eigen::MatrixXd Phi;
  Eigen::MatrixXd C;
  double delta = 0.0;
  /// G with C = G^T G, so that the model value is a squared norm.
  Eigen::MatrixXd sos_factor;
  PointList joint_anchors;
  KernelSpec kernel;

  /// Phi_j^T B Phi_j.
  double fill_value(Eigen::Index j) const;
  /// k_p^T C k_p with (k_p)_i = k_XY((x, y), (x_i, y_i)).
  double sos_value(const Point& x, const Point& y) const;
};

struct OTEstimate {
  double value = 0.0;
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  double delta_final = 0.0;
  double duality_gap = 0.0;
  double dual_objective = 0.0;    // F(gamma_hat)
  double primal_objective = 0.0;  // V_hat
  double constraint_residual_max = 0.0;
  int newton_iterations = 0;
  int outer_iterations = 0;
  double final_decrement = 0.0;
  bool converged = false;
};

/// q^2 / (2 lambda2) - sum_j gamma_j (w_mu(x_j) + w_nu(y_j)) / (2 lambda2).
double compute_ot_hat(const DualSolution& sol, const DualData& d);
double compute_ot_hat(const DualSolution& sol, const DualData& d, const EmbeddingEstimate& emb_mu,
                      const EmbeddingEstimate& emb_nu, const FillSet& fs);

std::pair<PotentialModel, PotentialModel> recover_potentials(const DualSolution& sol, const DualData& d,
                                                             const EmbeddingEstimate& emb_mu,
                                                             const EmbeddingEstimate& emb_nu,
                                                             const FillSet& fs, const KernelSpec& kx,
                                                             const KernelSpec& ky);

/// <u, w> in the RKHS of u's kernel, from the reproducing property.
double potential_embedding_inner(const PotentialModel& u);

/// |u|^2 given the Gram matrix of u's anchors.
double potential_norm_sq(const PotentialModel& u, const Eigen::MatrixXd& anchor_gram);

/// B = (delta / l) M(gamma)^{-1}. Throws DomainError when M is singular.
/// Without anchors/kernel the model still provides B, C and fill values.
ConstraintModel recover_constraint_operator(const DualSolution& sol, const DualData& d);
ConstraintModel recover_constraint_operator(const DualSolution& sol, const DualData& d,
                                            const FillSet& fs, const KernelSpec& kxy);

struct ConstraintValue {
  double h;
  std::optional<double> sos;
};

/// h(x, y) = 1/2 |x - y|^2 - u(x) - v(y), plus the SoS model value when cm is given.
ConstraintValue constraint_function(const PotentialModel& u, const PotentialModel& v,
                                    const ConstraintModel* cm, const Point& x, const Point& y);

/// x - grad u(x).
Point transport_map(const PotentialModel& u, const Point& x);

struct PrimalDual {
  double primal;  // V_hat
  double gap;     // F(gamma_hat) - V_hat
};

PrimalDual primal_objective_and_gap(const PotentialModel& u, const PotentialModel& v,
                                    const ConstraintModel& cm, const DualData& d,
                                    const DualSolution& sol);

/// max_j |c_j - u(x_j) - v(y_j) - Phi_j^T B Phi_j|.
double constraint_residual_max(const PotentialModel& u, const PotentialModel& v,
                               const ConstraintModel& cm, const DualData& d, const FillSet& fs);

enum class LambdaScenario { kExact, kEvaluation, kSampling, kHeuristic };

struct LambdaConstants {
  double c1 = 1.0;
  double c = 1.0;
  double c_prime = 1.0;
};

/// lambda1 = C1 l^{-(m-d)/(2d)} log(l / conf); lambda2 = lambda1 plus the
/// scenario's embedding term. The heuristic returns (1/l, 1/sqrt(n_mu)).
std::pair<double, double> select_lambdas(LambdaScenario scenario, std::size_t l, std::size_t n_mu,
                                         std::size_t n_nu, int m, int d,
                                         const LambdaConstants& constants = {},
                                         double confidence = 0.1);

/// Everything one estimate needs besides the regularization.
struct OtProblem {
  FillSet fill;
  KernelSpec kx;
  KernelSpec ky;
  KernelSpec kxy;
  EmbeddingEstimate emb_mu;
  EmbeddingEstimate emb_nu;
};

struct OtFit {
  DualData data;
  DualSolution solution;
  PotentialModel u;
  PotentialModel v;
  ConstraintModel constraint;
  OTEstimate estimate;
};

DualData base_dual_data(const OtProblem& problem, double lambda1 = 1.0, double lambda2 = 1.0);

/// Solves the dual and recovers every primal object.
OtFit fit(const OtProblem& problem, const DualData& base, double lambda1, double lambda2, double tau,
          const BarrierSchedule& schedule = {});
OtFit fit(const OtProblem& problem, double lambda1, double lambda2, double tau,
          const BarrierSchedule& schedule = {});

struct GridCell {
  double lambda1;
  double lambda2;
  std::optional<OTEstimate> estimate;
  std::string error;
};

struct GridSearchResult {
  std::vector<GridCell> cells;  // lambda1 outer, lambda2 inner
  std::optional<std::size_t> best;
};

/// One fit per (lambda1, lambda2). Best cell: smallest |OT_hat - reference|
/// when a reference is given, else smallest residual_max / (1 + |gap|).
/// Failed cells carry an error message; neither they nor cells whose solve
/// did not converge are ever best.
GridSearchResult grid_search(const OtProblem& problem, const std::vector<double>& lambda1s,
                             const std::vector<double>& lambda2s, std::optional<double> reference,
                             double tau, int threads = 1, const BarrierSchedule& schedule = {});

}  // namespace ksot
