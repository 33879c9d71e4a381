#include "ksot/kernels.hpp"

#include <cmath>
#include <sstream>
#include <vector>

#include "ksot/errors.hpp"

namespace ksot {

std::vector<double> half_integer_profile_poly(int p) {
  std::vector<double> coeffs(p + 1, 0.0);
  // p! / (2p)!
  double norm = 1.0;
  for (int k = p + 1; k <= 2 * p; ++k) norm /= k;
  for (int i = 0; i <= p; ++i) {
    const int j = p - i;  // power of r
    // (p+i)! / (i! (p-i)!)
    double c = 1.0;
    for (int k = 1; k <= p + i; ++k) c *= k;
    for (int k = 1; k <= i; ++k) c /= k;
    for (int k = 1; k <= p - i; ++k) c /= k;
    coeffs[j] = norm * c * std::pow(2.0, j);
  }
  return coeffs;
}

namespace {

const std::vector<double>& cached_half_integer_poly(int p) {
  static const std::vector<std::vector<double>> table = [] {
    std::vector<std::vector<double>> t;
    for (int q = 0; q <= 32; ++q) t.push_back(half_integer_profile_poly(q));
    return t;
  }();
  if (p < static_cast<int>(table.size())) return table[p];
  thread_local std::vector<double> scratch;
  scratch = half_integer_profile_poly(p);
  return scratch;
}

double poly_eval(const std::vector<double>& c, double r) {
  double acc = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * r + *it;
  return acc;
}

double poly_derivative_eval(const std::vector<double>& c, double r) {
  double acc = 0.0;
  for (std::size_t j = c.size() - 1; j >= 1; --j) {
    acc = acc * r + static_cast<double>(j) * c[j];
  }
  return acc;
}

// c_s r^nu K_nu(r) with c_s = 2^{1-nu} / Gamma(nu), unit lengthscale.
double matern_profile(double nu, double r) {
  if (r == 0.0) return 1.0;
  if (is_half_integer(nu)) {
    const int p = static_cast<int>(std::lround(nu - 0.5));
    return std::exp(-r) * poly_eval(cached_half_integer_poly(p), r);
  }
  const double log_c = (1.0 - nu) * std::log(2.0) - std::lgamma(nu);
  const double k = bessel_k(nu, r);
  if (k == 0.0) return 0.0;
  return std::exp(log_c + nu * std::log(r) + std::log(k));
}

// d/dr of matern_profile. Uses d/dr[r^nu K_nu(r)] = -r^nu K_{nu-1}(r).
double matern_profile_derivative(double nu, double r) {
  if (is_half_integer(nu)) {
    const int p = static_cast<int>(std::lround(nu - 0.5));
    const auto& poly = cached_half_integer_poly(p);
    if (p == 0 && r == 0.0) return -1.0;  // one-sided; exp(-r) has a kink
    return std::exp(-r) * (poly_derivative_eval(poly, r) - poly_eval(poly, r));
  }
  if (r == 0.0) return 0.0;  // nu > 1 here
  const double log_c = (1.0 - nu) * std::log(2.0) - std::lgamma(nu);
  const double k = bessel_k(nu - 1.0, r);
  if (k == 0.0) return 0.0;
  return -std::exp(log_c + nu * std::log(r) + std::log(k));
}

void check_same_dim(const KernelSpec& spec, const Point& z, const Point& z2) {
  if (z.size() != z2.size()) throw DimensionError("kernel: points have different dimensions");
  if (const auto d = spec.dimension(); d && *d != z.size()) {
    throw DimensionError("kernel: point dimension " + std::to_string(z.size()) +
                         " does not match kernel dimension " + std::to_string(*d));
  }
}

}  // namespace

KernelSpec KernelSpec::sobolev(double s, int d, double lengthscale) {
  if (d < 1) throw DomainError("sobolev kernel: dimension must be >= 1");
  if (!(s > d / 2.0)) throw DomainError("sobolev kernel: requires s > d/2");
  if (!(lengthscale > 0.0)) throw DomainError("kernel lengthscale must be positive");
  return KernelSpec{SobolevFamily{s, d}, lengthscale};
}

KernelSpec KernelSpec::gaussian(double sigma_sq, double lengthscale) {
  if (!(sigma_sq > 0.0)) throw DomainError("gaussian kernel: sigma_sq must be positive");
  if (!(lengthscale > 0.0)) throw DomainError("kernel lengthscale must be positive");
  return KernelSpec{GaussianFamily{sigma_sq}, lengthscale};
}

std::optional<int> KernelSpec::dimension() const {
  if (const auto* s = std::get_if<SobolevFamily>(&family)) return s->d;
  return std::nullopt;
}

double KernelSpec::matern_order() const {
  const auto& s = std::get<SobolevFamily>(family);
  return s.s - s.d / 2.0;
}

double KernelSpec::profile(double r) const {
  const double scaled = r / lengthscale;
  if (const auto* g = std::get_if<GaussianFamily>(&family)) {
    return std::exp(-scaled * scaled / (2.0 * g->sigma_sq));
  }
  const double nu = matern_order();
  if (!(nu > 0.0)) throw DomainError("sobolev kernel: requires s > d/2");
  return matern_profile(nu, scaled);
}

double KernelSpec::profile_derivative(double r) const {
  const double scaled = r / lengthscale;
  if (const auto* g = std::get_if<GaussianFamily>(&family)) {
    return -scaled / g->sigma_sq * std::exp(-scaled * scaled / (2.0 * g->sigma_sq)) / lengthscale;
  }
  return matern_profile_derivative(matern_order(), scaled) / lengthscale;
}

bool KernelSpec::has_analytic_gradient() const {
  return is_gaussian() || matern_order() >= 1.5;
}

std::string KernelSpec::describe() const {
  std::ostringstream os;
  os.precision(17);
  if (const auto* g = std::get_if<GaussianFamily>(&family)) {
    os << "gaussian(sigma_sq=" << g->sigma_sq;
  } else {
    const auto& s = std::get<SobolevFamily>(family);
    os << "sobolev(s=" << s.s << ",d=" << s.d;
  }
  os << ",lengthscale=" << lengthscale << ")";
  return os.str();
}

double eval_kernel(const KernelSpec& spec, const Point& z, const Point& z2) {
  check_same_dim(spec, z, z2);
  const double r = (z - z2).norm();
  if (r == 0.0) return 1.0;
  return spec.profile(r);
}

Eigen::VectorXd kernel_gradient(const KernelSpec& spec, const Point& z, const Point& z2) {
  check_same_dim(spec, z, z2);
  const Eigen::VectorXd diff = z - z2;
  const double r = diff.norm();
  if (r == 0.0) return Eigen::VectorXd::Zero(z.size());
  if (spec.has_analytic_gradient()) return (spec.profile_derivative(r) / r) * diff;

  // Central differences for kernels that are not C^1 at the diagonal.
  const double h = 1e-5 * spec.lengthscale;
  Eigen::VectorXd grad(z.size());
  Point zp = z;
  Point zm = z;
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    zp[i] = z[i] + h;
    zm[i] = z[i] - h;
    grad[i] = (eval_kernel(spec, zp, z2) - eval_kernel(spec, zm, z2)) / (2.0 * h);
    zp[i] = z[i];
    zm[i] = z[i];
  }
  return grad;
}

GramMatrix gram(const KernelSpec& spec, const PointList& points) {
  if (points.empty()) throw DomainError("gram: empty point list");
  const auto n = static_cast<Eigen::Index>(points.size());
  Eigen::MatrixXd k(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    k(i, i) = eval_kernel(spec, points[i], points[i]);
    for (Eigen::Index j = i + 1; j < n; ++j) {
      k(i, j) = eval_kernel(spec, points[i], points[j]);
      k(j, i) = k(i, j);
    }
  }
  return GramMatrix{points, std::move(k), spec};
}

Eigen::MatrixXd cross_gram(const KernelSpec& spec, const PointList& a, const PointList& b) {
  if (a.empty() || b.empty()) throw DomainError("cross_gram: empty point list");
  Eigen::MatrixXd k(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) k(i, j) = eval_kernel(spec, a[i], b[j]);
  }
  return k;
}

Eigen::VectorXd kernel_column(const KernelSpec& spec, const PointList& anchors, const Point& p) {
  Eigen::VectorXd col(anchors.size());
  for (std::size_t i = 0; i < anchors.size(); ++i) col[i] = eval_kernel(spec, anchors[i], p);
  return col;
}

}  // namespace ksot
