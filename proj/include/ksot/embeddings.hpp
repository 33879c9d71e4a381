#pragma once

#include <memory>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "ksot/geometry.hpp"
#include "ksot/kernels.hpp"
#include "ksot/types.hpp"

namespace ksot {

/// Description of a probability measure on a box.
struct MeasureSpec {
  struct Samples {
    PointList points;
  };
  /// Density values (unnormalized, >= 0) at the given points.
  struct DensityEvals {
    PointList points;
    std::vector<double> values;
  };
  struct UniformBox {};
  /// N(mean, cov) restricted to the domain box and renormalized.
  struct TruncatedGaussian {
    Eigen::VectorXd mean;
    Eigen::MatrixXd cov;
  };

  std::variant<Samples, DensityEvals, UniformBox, TruncatedGaussian> kind;
  Domain domain;

  /// Density of a closed-form measure at x (zero outside the box).
  double density(const Point& x) const;
};

enum class EmbeddingMethod { kExact, kEvaluation, kSample };

const char* to_string(EmbeddingMethod m);

/// Per-dimension Gauss-Legendre settings: `panels` sub-intervals with `nodes` points each.
struct QuadratureOptions {
  int nodes = 16;
  int panels = 8;
};

/// Kernel mean embedding surrogate w(.) in the RKHS of `kernel`: exposes
/// point evaluations, gradients and the squared RKHS norm.
class EmbeddingEstimate {
 public:
  struct Representation {
    virtual ~Representation() = default;
    virtual double value(const Point& p) const = 0;
    virtual Eigen::VectorXd gradient(const Point& p) const = 0;
  };

  EmbeddingEstimate(EmbeddingMethod method, KernelSpec kernel, double norm_sq,
                    std::shared_ptr<const Representation> rep, bool closed_form);

  EmbeddingMethod method() const { return method_; }
  const KernelSpec& kernel() const { return kernel_; }
  double norm_sq() const { return norm_sq_; }
  /// False when values are quadrature approximations rather than closed forms.
  bool closed_form() const { return closed_form_; }

  double value(const Point& p) const { return rep_->value(p); }
  Eigen::VectorXd values(const PointList& ps) const;
  Eigen::VectorXd gradient(const Point& p) const { return rep_->gradient(p); }

 private:
  EmbeddingMethod method_;
  KernelSpec kernel_;
  double norm_sq_;
  std::shared_ptr<const Representation> rep_;
  bool closed_form_;
};

/// w(p) = (1/n) sum_j k(x_j, p); |w|^2 = (1/n^2) sum_ij k(x_i, x_j).
EmbeddingEstimate sample_embedding(const PointList& samples, const KernelSpec& kernel);

/// Kernel least squares density estimate g = sum_j alpha_j k(x_j, .) with
/// alpha = (K + jitter I)^{-1} c, embedded as w = int k(., x) g(x) dx over the box.
EmbeddingEstimate evaluation_embedding(const MeasureSpec& spec, const KernelSpec& kernel,
                                       const QuadratureOptions& quad = {});

/// w(p) = int k(p, x) dmu(x) for a closed-form measure.
EmbeddingEstimate exact_embedding(const MeasureSpec& spec, const KernelSpec& kernel,
                                  const QuadratureOptions& quad = {});

/// Dispatches on the measure kind: samples -> sample, density evaluations ->
/// evaluation, closed forms -> exact.
EmbeddingEstimate make_embedding(const MeasureSpec& spec, const KernelSpec& kernel,
                                 const QuadratureOptions& quad = {});

}  // namespace ksot
