#pragma once

#include <Eigen/Dense>

#include "ksot/kernels.hpp"

namespace ksot {

/// Escalation ladder used whenever a Gram-like matrix must be factorized.
/// The first attempt adds no jitter; afterwards jitter starts at
/// `first_step * scale` and grows by `growth` until `max_relative * scale`,
/// where scale = max|K|.
struct JitterPolicy {
  double first_step = 1e-14;
  double growth = 10.0;
  double max_relative = 1e-6;
};

/// K + jitter_used * I = R^T R with R upper triangular. Column j of R is the
/// feature vector Phi_j, so Phi_i^T Phi_j = K_ij.
struct CholeskyFactor {
  Eigen::MatrixXd R;
  double jitter_used = 0.0;
};

/// Factorizes a symmetric matrix, escalating the diagonal jitter until the
/// factorization succeeds. Throws NotPsdError if even the largest jitter fails.
CholeskyFactor cholesky_psd(const Eigen::MatrixXd& k, const JitterPolicy& policy = {});
CholeskyFactor cholesky_psd(const GramMatrix& k, const JitterPolicy& policy = {});

/// Lower Cholesky factor of K + jitter I with the same ladder.
Eigen::LLT<Eigen::MatrixXd> llt_with_jitter(const Eigen::MatrixXd& k, double* jitter_used = nullptr,
                                            const JitterPolicy& policy = {});

/// Smallest eigenvalue of a symmetric matrix.
double min_eigenvalue(const Eigen::MatrixXd& sym);

/// Principal square root of a symmetric PSD matrix (negative eigenvalues are clipped).
Eigen::MatrixXd sym_sqrt(const Eigen::MatrixXd& sym);

}  // namespace ksot
