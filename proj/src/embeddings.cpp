#include "ksot/embeddings.hpp"

#include <cmath>
#include <numbers>

#include "ksot/errors.hpp"
#include "ksot/linalg.hpp"
#include "ksot/quadrature.hpp"

namespace ksot {
namespace {

constexpr double kSqrtPi = 1.7724538509055160273;
constexpr double kSqrtHalfPi = 1.2533141373155002512;  // sqrt(pi / 2)

// Tensorized quadrature budget: nodes for evaluations, nodes^2 for norms.
constexpr double kMaxQuadratureNodes = 2e4;

// ---------------------------------------------------------------------------
// One-dimensional Gaussian-on-interval integrals, bandwidth s (standard deviation).

// int_lo^hi exp(-(p - x)^2 / 2s^2) dx
double gauss_single(double p, double lo, double hi, double s) {
  const double c = s * std::numbers::sqrt2;
  return s * kSqrtHalfPi * (std::erf((hi - p) / c) - std::erf((lo - p) / c));
}

double gauss_single_dp(double p, double lo, double hi, double s) {
  const double two_s2 = 2.0 * s * s;
  return std::exp(-(lo - p) * (lo - p) / two_s2) - std::exp(-(hi - p) * (hi - p) / two_s2);
}

// int int_[lo,hi]^2 exp(-(x - x')^2 / 2s^2) dx dx'
double gauss_double(double lo, double hi, double s) {
  const double w = hi - lo;
  return 2.0 * w * s * kSqrtHalfPi * std::erf(w / (s * std::numbers::sqrt2)) -
         2.0 * s * s * (1.0 - std::exp(-w * w / (2.0 * s * s)));
}

// int_lo^hi k(a, x) k(b, x) dx
double gauss_product(double a, double b, double lo, double hi, double s) {
  const double m = 0.5 * (a + b);
  const double e = std::exp(-(a - b) * (a - b) / (4.0 * s * s));
  return e * 0.5 * s * kSqrtPi * (std::erf((hi - m) / s) - std::erf((lo - m) / s));
}

double gauss_product_da(double a, double b, double lo, double hi, double s) {
  const double m = 0.5 * (a + b);
  const double s2 = s * s;
  const double e = std::exp(-(a - b) * (a - b) / (4.0 * s2));
  const double j = 0.5 * s * kSqrtPi * (std::erf((hi - m) / s) - std::erf((lo - m) / s));
  const double dj = 0.5 * (std::exp(-(lo - m) * (lo - m) / s2) - std::exp(-(hi - m) * (hi - m) / s2));
  return e * (-(a - b) / (2.0 * s2) * j + dj);
}

// int int k(a, x) k(x, x') k(x', b) dx dx' = int k(a, x) gauss_product(x, b) dx
double gauss_triple(double a, double b, double lo, double hi, double s, const QuadratureRule& rule) {
  double acc = 0.0;
  for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
    const double x = rule.nodes[q];
    acc += rule.weights[q] * std::exp(-(a - x) * (a - x) / (2.0 * s * s)) *
           gauss_product(x, b, lo, hi, s);
  }
  return acc;
}

double gaussian_bandwidth(const KernelSpec& k) {
  return std::sqrt(std::get<GaussianFamily>(k.family).sigma_sq) * k.lengthscale;
}

void check_point_dim(const Point& p, int dim) {
  if (p.size() != dim) throw DimensionError("embedding: evaluation point has wrong dimension");
}

// ---------------------------------------------------------------------------
// Half-integer Sobolev kernels on an interval (1D): profile e^{-r} P(r).

// int_0^L r^n e^{-r} dr = n! (1 - e^{-L} sum_{j<=n} L^j / j!)
double lower_gamma_int(int n, double length) {
  double term = 1.0;
  double partial = 1.0;
  double fact = 1.0;
  for (int j = 1; j <= n; ++j) {
    term *= length / j;
    partial += term;
    fact *= j;
  }
  return fact * (-std::expm1(-length) - std::exp(-length) * (partial - 1.0));
}

// int_0^L e^{-r} P(r) r^shift dr
double poly_exp_integral(const std::vector<double>& poly, double length, int shift) {
  double acc = 0.0;
  for (std::size_t k = 0; k < poly.size(); ++k) {
    acc += poly[k] * lower_gamma_int(static_cast<int>(k) + shift, length);
  }
  return acc;
}

// ---------------------------------------------------------------------------
// Representations.

// w(p) = sum_j c_j k(a_j, p)
struct ExpansionRep final : EmbeddingEstimate::Representation {
  KernelSpec kernel;
  PointList anchors;
  Eigen::VectorXd coeffs;

  ExpansionRep(KernelSpec k, PointList a, Eigen::VectorXd c)
      : kernel(std::move(k)), anchors(std::move(a)), coeffs(std::move(c)) {}

  double value(const Point& p) const override {
    double acc = 0.0;
    for (std::size_t j = 0; j < anchors.size(); ++j) acc += coeffs[j] * eval_kernel(kernel, p, anchors[j]);
    return acc;
  }
  Eigen::VectorXd gradient(const Point& p) const override {
    Eigen::VectorXd g = Eigen::VectorXd::Zero(p.size());
    for (std::size_t j = 0; j < anchors.size(); ++j) g += coeffs[j] * kernel_gradient(kernel, p, anchors[j]);
    return g;
  }
};

// Product over dimensions of per-axis weighted Gaussian integrals:
// w(p) = prod_i sum_q weight_iq exp(-(p_i - node_iq)^2 / 2s^2), or the closed
// uniform form when `uniform` is set.
struct GaussianBoxRep final : EmbeddingEstimate::Representation {
  Domain domain;
  double s;
  bool uniform;
  std::vector<QuadratureRule> axis_rules;  // density-weighted nodes per axis (non-uniform)

  double axis_value(int i, double x) const {
    const auto [lo, hi] = domain.bounds[i];
    if (uniform) return gauss_single(x, lo, hi, s) / (hi - lo);
    const auto& r = axis_rules[i];
    double acc = 0.0;
    for (std::size_t q = 0; q < r.nodes.size(); ++q) {
      const double d = x - r.nodes[q];
      acc += r.weights[q] * std::exp(-d * d / (2.0 * s * s));
    }
    return acc;
  }
  double axis_derivative(int i, double x) const {
    const auto [lo, hi] = domain.bounds[i];
    if (uniform) return gauss_single_dp(x, lo, hi, s) / (hi - lo);
    const auto& r = axis_rules[i];
    double acc = 0.0;
    for (std::size_t q = 0; q < r.nodes.size(); ++q) {
      const double d = x - r.nodes[q];
      acc -= r.weights[q] * d / (s * s) * std::exp(-d * d / (2.0 * s * s));
    }
    return acc;
  }
  double value(const Point& p) const override {
    check_point_dim(p, domain.dim());
    double v = 1.0;
    for (int i = 0; i < domain.dim(); ++i) v *= axis_value(i, p[i]);
    return v;
  }
  Eigen::VectorXd gradient(const Point& p) const override {
    check_point_dim(p, domain.dim());
    const int d = domain.dim();
    std::vector<double> vals(d);
    for (int i = 0; i < d; ++i) vals[i] = axis_value(i, p[i]);
    Eigen::VectorXd g(d);
    for (int i = 0; i < d; ++i) {
      double prod = axis_derivative(i, p[i]);
      for (int k = 0; k < d; ++k) {
        if (k != i) prod *= vals[k];
      }
      g[i] = prod;
    }
    return g;
  }
};

// Evaluation estimator with a Gaussian kernel on a box:
// w(p) = sum_j alpha_j prod_i int k(p_i, x) k(x_ji, x) dx.
struct GaussianEvaluationRep final : EmbeddingEstimate::Representation {
  Domain domain;
  double s;
  PointList anchors;
  Eigen::VectorXd alpha;

  double value(const Point& p) const override {
    check_point_dim(p, domain.dim());
    double acc = 0.0;
    for (std::size_t j = 0; j < anchors.size(); ++j) {
      double prod = 1.0;
      for (int i = 0; i < domain.dim(); ++i) {
        prod *= gauss_product(p[i], anchors[j][i], domain.bounds[i].first, domain.bounds[i].second, s);
      }
      acc += alpha[j] * prod;
    }
    return acc;
  }
  Eigen::VectorXd gradient(const Point& p) const override {
    check_point_dim(p, domain.dim());
    const int d = domain.dim();
    Eigen::VectorXd g = Eigen::VectorXd::Zero(d);
    std::vector<double> vals(d);
    std::vector<double> ders(d);
    for (std::size_t j = 0; j < anchors.size(); ++j) {
      for (int i = 0; i < d; ++i) {
        const auto [lo, hi] = domain.bounds[i];
        vals[i] = gauss_product(p[i], anchors[j][i], lo, hi, s);
        ders[i] = gauss_product_da(p[i], anchors[j][i], lo, hi, s);
      }
      for (int i = 0; i < d; ++i) {
        double prod = ders[i];
        for (int k = 0; k < d; ++k) {
          if (k != i) prod *= vals[k];
        }
        g[i] += alpha[j] * prod;
      }
    }
    return g;
  }
};

// Uniform measure on an interval with a half-integer Sobolev kernel (1D).
struct SobolevIntervalRep final : EmbeddingEstimate::Representation {
  KernelSpec kernel;
  double lo, hi;
  std::vector<double> poly;

  // Odd antiderivative of t -> profile(|t|), in unscaled units.
  double antiderivative(double t) const {
    const double ls = kernel.lengthscale;
    const double g = ls * poly_exp_integral(poly, std::abs(t) / ls, 0);
    return t < 0.0 ? -g : g;
  }
  double value(const Point& p) const override {
    check_point_dim(p, 1);
    return (antiderivative(hi - p[0]) - antiderivative(lo - p[0])) / (hi - lo);
  }
  Eigen::VectorXd gradient(const Point& p) const override {
    check_point_dim(p, 1);
    Eigen::VectorXd g(1);
    g[0] = (kernel.profile(std::abs(lo - p[0])) - kernel.profile(std::abs(hi - p[0]))) / (hi - lo);
    return g;
  }
};

// ---------------------------------------------------------------------------
// Tensorized quadrature helpers for the generic paths.

struct TensorRule {
  PointList nodes;
  std::vector<double> weights;
};

TensorRule tensor_rule(const Domain& domain, const QuadratureOptions& quad) {
  const int d = domain.dim();
  const double per_dim = static_cast<double>(quad.nodes) * quad.panels;
  if (std::pow(per_dim, d) > kMaxQuadratureNodes) {
    throw BudgetError("embedding: tensorized quadrature exceeds the node budget");
  }
  std::vector<QuadratureRule> axes;
  for (const auto& [lo, hi] : domain.bounds) {
    axes.push_back(composite_gauss_legendre(quad.nodes, quad.panels, lo, hi));
  }
  TensorRule out;
  std::vector<std::size_t> idx(d, 0);
  const std::size_t m = axes[0].nodes.size();
  while (true) {
    Point x(d);
    double w = 1.0;
    for (int i = 0; i < d; ++i) {
      x[i] = axes[i].nodes[idx[i]];
      w *= axes[i].weights[idx[i]];
    }
    out.nodes.push_back(std::move(x));
    out.weights.push_back(w);
    int k = 0;
    while (k < d && ++idx[k] == m) idx[k++] = 0;
    if (k == d) break;
  }
  return out;
}

// c^T K c without materializing K.
double expansion_norm_sq(const KernelSpec& kernel, const PointList& nodes, const Eigen::VectorXd& c) {
  double acc = 0.0;
  for (std::size_t a = 0; a < nodes.size(); ++a) {
    double row = 0.5 * c[a];
    for (std::size_t b = a + 1; b < nodes.size(); ++b) row += c[b] * eval_kernel(kernel, nodes[a], nodes[b]);
    acc += 2.0 * c[a] * row;
  }
  return acc;
}

bool is_diagonal(const Eigen::MatrixXd& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (i != j && m(i, j) != 0.0) return false;
    }
  }
  return true;
}

void check_kernel_dim(const KernelSpec& kernel, int dim) {
  if (const auto d = kernel.dimension(); d && *d != dim) {
    throw DimensionError("embedding: kernel dimension does not match the domain");
  }
}

}  // namespace

// ---------------------------------------------------------------------------

double MeasureSpec::density(const Point& x) const {
  if (!domain.contains(x)) return 0.0;
  if (std::holds_alternative<UniformBox>(kind)) return 1.0 / domain.volume();
  if (const auto* tg = std::get_if<TruncatedGaussian>(&kind)) {
    // Unnormalized; callers normalize by quadrature.
    const Eigen::VectorXd diff = x - tg->mean;
    return std::exp(-0.5 * diff.dot(tg->cov.llt().solve(diff)));
  }
  throw DomainError("density: measure has no closed form");
}

const char* to_string(EmbeddingMethod m) {
  switch (m) {
    case EmbeddingMethod::kExact:
      return "exact";
    case EmbeddingMethod::kEvaluation:
      return "evaluation";
    case EmbeddingMethod::kSample:
      return "sample";
  }
  return "unknown";
}

EmbeddingEstimate::EmbeddingEstimate(EmbeddingMethod method, KernelSpec kernel, double norm_sq,
                                     std::shared_ptr<const Representation> rep, bool closed_form)
    : method_(method),
      kernel_(std::move(kernel)),
      norm_sq_(norm_sq),
      rep_(std::move(rep)),
      closed_form_(closed_form) {}

Eigen::VectorXd EmbeddingEstimate::values(const PointList& ps) const {
  Eigen::VectorXd out(ps.size());
  for (std::size_t i = 0; i < ps.size(); ++i) out[i] = value(ps[i]);
  return out;
}

EmbeddingEstimate sample_embedding(const PointList& samples, const KernelSpec& kernel) {
  if (samples.empty()) throw DomainError("sample_embedding: no samples");
  const auto n = static_cast<double>(samples.size());
  const Eigen::MatrixXd k = gram(kernel, samples).entries;
  const double norm_sq = k.sum() / (n * n);
  auto rep = std::make_shared<ExpansionRep>(kernel, samples,
                                            Eigen::VectorXd::Constant(samples.size(), 1.0 / n));
  return EmbeddingEstimate(EmbeddingMethod::kSample, kernel, norm_sq, std::move(rep), true);
}

EmbeddingEstimate evaluation_embedding(const MeasureSpec& spec, const KernelSpec& kernel,
                                       const QuadratureOptions& quad) {
  const auto* ev = std::get_if<MeasureSpec::DensityEvals>(&spec.kind);
  if (!ev) throw DomainError("evaluation_embedding: measure must carry density evaluations");
  if (ev->points.empty() || ev->points.size() != ev->values.size()) {
    throw DimensionError("evaluation_embedding: points and values must be nonempty and aligned");
  }
  const int d = spec.domain.dim();
  check_kernel_dim(kernel, d);
  for (std::size_t j = 0; j < ev->points.size(); ++j) {
    if (ev->values[j] < 0.0) throw DomainError("evaluation_embedding: negative density value");
    if (!spec.domain.contains(ev->points[j], 1e-12)) {
      throw DomainError("evaluation_embedding: evaluation point outside the domain");
    }
  }

  const Eigen::MatrixXd kx = gram(kernel, ev->points).entries;
  const Eigen::VectorXd c = Eigen::Map<const Eigen::VectorXd>(ev->values.data(), ev->values.size());
  const Eigen::VectorXd alpha = llt_with_jitter(kx).solve(c);
  const std::size_t n = ev->points.size();

  if (kernel.is_gaussian()) {
    const double s = gaussian_bandwidth(kernel);
    std::vector<QuadratureRule> rules;
    for (const auto& [lo, hi] : spec.domain.bounds) {
      rules.push_back(composite_gauss_legendre(quad.nodes, quad.panels, lo, hi));
    }
    Eigen::MatrixXd triple(n, n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t t = i; t < n; ++t) {
        double prod = 1.0;
        for (int k = 0; k < d; ++k) {
          const auto [lo, hi] = spec.domain.bounds[k];
          prod *= gauss_triple(ev->points[i][k], ev->points[t][k], lo, hi, s, rules[k]);
        }
        triple(i, t) = prod;
        triple(t, i) = prod;
      }
    }
    auto rep = std::make_shared<GaussianEvaluationRep>();
    rep->domain = spec.domain;
    rep->s = s;
    rep->anchors = ev->points;
    rep->alpha = alpha;
    return EmbeddingEstimate(EmbeddingMethod::kEvaluation, kernel, alpha.dot(triple * alpha),
                             std::move(rep), true);
  }

  // Generic kernel: w = sum_q beta_q k(., x_q) with beta_q = w_q g(x_q).
  const TensorRule rule = tensor_rule(spec.domain, quad);
  const std::size_t m = rule.nodes.size();
  Eigen::VectorXd beta(m);
  for (std::size_t q = 0; q < m; ++q) {
    double g = 0.0;
    for (std::size_t j = 0; j < n; ++j) g += alpha[j] * eval_kernel(kernel, ev->points[j], rule.nodes[q]);
    beta[q] = rule.weights[q] * g;
  }
  const double norm_sq = expansion_norm_sq(kernel, rule.nodes, beta);
  auto rep = std::make_shared<ExpansionRep>(kernel, rule.nodes, beta);
  return EmbeddingEstimate(EmbeddingMethod::kEvaluation, kernel, norm_sq, std::move(rep), false);
}

EmbeddingEstimate exact_embedding(const MeasureSpec& spec, const KernelSpec& kernel,
                                  const QuadratureOptions& quad) {
  const bool uniform = std::holds_alternative<MeasureSpec::UniformBox>(spec.kind);
  const auto* tg = std::get_if<MeasureSpec::TruncatedGaussian>(&spec.kind);
  if (!uniform && !tg) throw DomainError("exact_embedding: measure has no closed form");
  const int d = spec.domain.dim();
  check_kernel_dim(kernel, d);
  if (tg && (tg->mean.size() != d || tg->cov.rows() != d || tg->cov.cols() != d)) {
    throw DimensionError("exact_embedding: truncated gaussian parameters do not match the domain");
  }

  if (kernel.is_gaussian() && (uniform || is_diagonal(tg->cov))) {
    const double s = gaussian_bandwidth(kernel);
    auto rep = std::make_shared<GaussianBoxRep>();
    rep->domain = spec.domain;
    rep->s = s;
    rep->uniform = uniform;
    double norm_sq = 1.0;
    if (uniform) {
      for (const auto& [lo, hi] : spec.domain.bounds) norm_sq *= gauss_double(lo, hi, s) / ((hi - lo) * (hi - lo));
    } else {
      // Axis-separable truncated normal: density-weighted 1D rules.
      for (int i = 0; i < d; ++i) {
        const auto [lo, hi] = spec.domain.bounds[i];
        auto rule = composite_gauss_legendre(quad.nodes, quad.panels, lo, hi);
        const double mean = tg->mean[i];
        const double var = tg->cov(i, i);
        double z = 0.0;
        for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
          const double u = rule.nodes[q] - mean;
          rule.weights[q] *= std::exp(-0.5 * u * u / var);
          z += rule.weights[q];
        }
        for (auto& w : rule.weights) w /= z;
        double axis_norm = 0.0;
        for (std::size_t a = 0; a < rule.nodes.size(); ++a) {
          for (std::size_t b = 0; b < rule.nodes.size(); ++b) {
            const double u = rule.nodes[a] - rule.nodes[b];
            axis_norm += rule.weights[a] * rule.weights[b] * std::exp(-u * u / (2.0 * s * s));
          }
        }
        norm_sq *= axis_norm;
        rep->axis_rules.push_back(std::move(rule));
      }
    }
    return EmbeddingEstimate(EmbeddingMethod::kExact, kernel, norm_sq, std::move(rep), uniform);
  }

  if (kernel.is_sobolev() && uniform && d == 1 && is_half_integer(kernel.matern_order())) {
    auto rep = std::make_shared<SobolevIntervalRep>();
    rep->kernel = kernel;
    rep->lo = spec.domain.bounds[0].first;
    rep->hi = spec.domain.bounds[0].second;
    rep->poly = half_integer_profile_poly(static_cast<int>(std::lround(kernel.matern_order() - 0.5)));
    const double w = rep->hi - rep->lo;
    const double ls = kernel.lengthscale;
    const double len = w / ls;
    // 2 int_0^W (W - t) k(t) dt / W^2
    const double norm_sq =
        2.0 * ls * (w * poly_exp_integral(rep->poly, len, 0) - ls * poly_exp_integral(rep->poly, len, 1)) /
        (w * w);
    return EmbeddingEstimate(EmbeddingMethod::kExact, kernel, norm_sq, std::move(rep), true);
  }

  // Generic: w = sum_q w_q rho(x_q) k(., x_q).
  const TensorRule rule = tensor_rule(spec.domain, quad);
  const std::size_t m = rule.nodes.size();
  Eigen::VectorXd beta(m);
  for (std::size_t q = 0; q < m; ++q) beta[q] = rule.weights[q] * spec.density(rule.nodes[q]);
  beta /= beta.sum();
  const double norm_sq = expansion_norm_sq(kernel, rule.nodes, beta);
  auto rep = std::make_shared<ExpansionRep>(kernel, rule.nodes, beta);
  return EmbeddingEstimate(EmbeddingMethod::kExact, kernel, norm_sq, std::move(rep), false);
}

EmbeddingEstimate make_embedding(const MeasureSpec& spec, const KernelSpec& kernel,
                                 const QuadratureOptions& quad) {
  if (const auto* s = std::get_if<MeasureSpec::Samples>(&spec.kind)) {
    return sample_embedding(s->points, kernel);
  }
  if (std::holds_alternative<MeasureSpec::DensityEvals>(spec.kind)) {
    return evaluation_embedding(spec, kernel, quad);
  }
  return exact_embedding(spec, kernel, quad);
}

}  // namespace ksot
