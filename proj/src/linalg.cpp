#include "ksot/linalg.hpp"

#include <cmath>

#include "ksot/errors.hpp"

namespace ksot {

Eigen::LLT<Eigen::MatrixXd> llt_with_jitter(const Eigen::MatrixXd& k, double* jitter_used,
                                            const JitterPolicy& policy) {
  if (k.rows() != k.cols()) throw DimensionError("cholesky: matrix is not square");
  if (k.size() == 0) throw DimensionError("cholesky: empty matrix");
  const double scale = k.cwiseAbs().maxCoeff();
  const double max_jitter = policy.max_relative * (scale > 0.0 ? scale : 1.0);

  double jitter = 0.0;
  double next = policy.first_step * (scale > 0.0 ? scale : 1.0);
  while (true) {
    Eigen::MatrixXd shifted = k;
    shifted.diagonal().array() += jitter;
    Eigen::LLT<Eigen::MatrixXd> llt(shifted);
    if (llt.info() == Eigen::Success && llt.matrixLLT().diagonal().minCoeff() > 0.0) {
      if (jitter_used) *jitter_used = jitter;
      return llt;
    }
    if (jitter >= max_jitter) break;
    jitter = std::min(next, max_jitter);
    next *= policy.growth;
  }
  throw NotPsdError("cholesky: matrix is not positive semidefinite (failed at jitter " +
                    std::to_string(max_jitter) + ")");
}

CholeskyFactor cholesky_psd(const Eigen::MatrixXd& k, const JitterPolicy& policy) {
  double jitter = 0.0;
  const auto llt = llt_with_jitter(k, &jitter, policy);
  return CholeskyFactor{llt.matrixU(), jitter};
}

CholeskyFactor cholesky_psd(const GramMatrix& k, const JitterPolicy& policy) {
  return cholesky_psd(k.entries, policy);
}

double min_eigenvalue(const Eigen::MatrixXd& sym) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

Eigen::MatrixXd sym_sqrt(const Eigen::MatrixXd& sym) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
  const Eigen::VectorXd root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * root.asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace ksot
