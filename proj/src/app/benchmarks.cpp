#include "ksot/app/benchmarks.hpp"

#include <cmath>

#include "ksot/embeddings.hpp"

namespace ksot::app {

std::mt19937_64 stream(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b)};
  return std::mt19937_64(seq);
}

OtProblem TranslationBenchmark::problem(std::size_t l, const KernelSpec& marginal, const KernelSpec& joint,
                                        bool exact_embeddings, std::size_t n, std::uint64_t seed) const {
  const Domain dx = domain_x(), dy = domain_y();
  FillSet fill = sobol_pairs(dx, dy, l);
  if (exact_embeddings) {
    return OtProblem{std::move(fill), marginal, marginal, joint,
                     exact_embedding(MeasureSpec{MeasureSpec::UniformBox{}, dx}, marginal),
                     exact_embedding(MeasureSpec{MeasureSpec::UniformBox{}, dy}, marginal)};
  }
  const PointList xs = uniform_points(dx, n, stream(seed, 1, 0)());
  const PointList ys = uniform_points(dy, n, stream(seed, 1, 1)());
  return OtProblem{std::move(fill), marginal, marginal, joint, sample_embedding(xs, marginal),
                   sample_embedding(ys, marginal)};
}

Point GaussianMapBenchmark::map(const Point& x) const {
  return (scale * x.array() + offset).matrix();
}

PointList GaussianMapBenchmark::sample_mu(std::size_t n, std::mt19937_64& rng) const {
  std::normal_distribution<double> n01;
  PointList out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Point p(kDim);
    for (int k = 0; k < kDim; ++k) {
      double v;
      do v = n01(rng);
      while (std::abs(v) > 1.0);
      p[k] = v;
    }
    out.push_back(std::move(p));
  }
  return out;
}

PointList GaussianMapBenchmark::sample_nu(std::size_t n, std::mt19937_64& rng) const {
  PointList out = sample_mu(n, rng);
  for (auto& p : out) p = map(p);
  return out;
}

double GaussianMapBenchmark::closed_form_reference() const {
  // Second moment of N(0, 1) truncated to [-1, 1].
  const double phi1 = std::exp(-0.5) / std::sqrt(2.0 * M_PI);
  const double mass = std::erf(1.0 / std::sqrt(2.0));
  const double m2 = 1.0 - 2.0 * phi1 / mass;
  return 0.5 * kDim * ((1.0 - scale) * (1.0 - scale) * m2 + offset * offset);
}

OtProblem GaussianMapBenchmark::problem(std::size_t n, std::uint64_t seed, std::uint64_t replicate,
                                        const KernelSpec& marginal, const KernelSpec& joint) const {
  auto rng = stream(seed, n, replicate);
  const PointList xs = sample_mu(n, rng);
  const PointList ys = sample_nu(n, rng);
  return OtProblem{sobol_pairs(domain_x(), domain_y(), 100 + n), marginal, marginal, joint,
                   sample_embedding(xs, marginal), sample_embedding(ys, marginal)};
}

McReference monte_carlo_reference(const GaussianMapBenchmark& b, std::size_t samples, std::uint64_t seed) {
  auto rng = stream(seed, 0xffffffffULL, 0);
  double mean = 0.0, m2 = 0.0;
  std::size_t k = 0;
  constexpr std::size_t kChunk = 4096;
  while (k < samples) {
    const std::size_t take = std::min(kChunk, samples - k);
    for (const Point& x : b.sample_mu(take, rng)) {
      const double c = 0.5 * (x - b.map(x)).squaredNorm();
      ++k;
      const double delta = c - mean;
      mean += delta / static_cast<double>(k);
      m2 += delta * (c - mean);
    }
  }
  const double var = m2 / static_cast<double>(samples - 1);
  return {mean, std::sqrt(var / static_cast<double>(samples)), samples};
}

PotentialSpec quartic_potential() {
  PotentialSpec s;
  s.f = [](const Point& x) { return std::pow(x[0], 4) / 4.0 + x[0] * x[0] / 2.0; };
  s.grad_f = [](const Point& x) -> Eigen::VectorXd {
    return Eigen::VectorXd::Constant(1, x[0] * x[0] * x[0] + x[0]);
  };
  s.hessian_f = [](const Point& x) -> Eigen::MatrixXd {
    return Eigen::MatrixXd::Constant(1, 1, 3.0 * x[0] * x[0] + 1.0);
  };
  const auto inverse = bisection_inverse([](double z) { return z * z * z + z; }, -1.0, 1.0);
  s.t_inverse = [inverse](const Point& y) -> Point { return Point::Constant(1, inverse(y[0])); };
  s.domain_x = Domain::cube(1, -1.0, 1.0);
  s.domain_y = Domain::cube(1, -2.0, 2.0);
  s.rho = 1.0;
  return s;
}

PotentialSpec exponential_potential() {
  PotentialSpec s;
  s.f = [](const Point& x) { return std::exp(x[0]); };
  s.grad_f = [](const Point& x) -> Eigen::VectorXd { return Eigen::VectorXd::Constant(1, std::exp(x[0])); };
  s.hessian_f = [](const Point& x) -> Eigen::MatrixXd { return Eigen::MatrixXd::Constant(1, 1, std::exp(x[0])); };
  s.t_inverse = [](const Point& y) -> Point { return Point::Constant(1, std::log(y[0])); };
  s.domain_x = Domain::cube(1, -1.0, 1.0);
  s.domain_y = Domain::cube(1, std::exp(-1.0), std::exp(1.0));
  s.rho = std::exp(-1.0);
  return s;
}

PotentialSpec diagonal_quadratic_potential(const Eigen::VectorXd& a) {
  PotentialSpec s;
  s.f = [a](const Point& x) { return 0.5 * x.dot(a.asDiagonal() * x); };
  s.grad_f = [a](const Point& x) -> Eigen::VectorXd { return a.asDiagonal() * x; };
  s.hessian_f = [a](const Point&) -> Eigen::MatrixXd { return a.asDiagonal(); };
  s.t_inverse = [a](const Point& y) -> Point { return y.cwiseQuotient(a); };
  const int d = static_cast<int>(a.size());
  s.domain_x = Domain::cube(d, -1.0, 1.0);
  Domain dy;
  for (int i = 0; i < d; ++i) dy.bounds.emplace_back(-a[i], a[i]);
  s.domain_y = dy;
  s.rho = a.minCoeff();
  return s;
}

}  // namespace ksot::app
