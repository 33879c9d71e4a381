#pragma once

#include <cstdint>
#include <random>
#include <string>

#include "ksot/geometry.hpp"
#include "ksot/ot_estimator.hpp"
#include "ksot/sos_witness.hpp"

namespace ksot::app {

/// Deterministic stream for (seed, a, b).
std::mt19937_64 stream(std::uint64_t seed, std::uint64_t a, std::uint64_t b);

/// Uniform on [0, 1] against uniform on [shift, 1 + shift]: T(x) = x + shift,
/// OT = shift^2 / 2.
struct TranslationBenchmark {
  double shift = 0.3;

  Domain domain_x() const { return Domain::cube(1, 0.0, 1.0); }
  Domain domain_y() const { return Domain::cube(1, shift, 1.0 + shift); }
  double reference() const { return 0.5 * shift * shift; }

  /// Sobol fill set of size l. Exact embeddings, or sample embeddings from n
  /// uniform draws per side.
  OtProblem problem(std::size_t l, const KernelSpec& marginal, const KernelSpec& joint,
                    bool exact_embeddings, std::size_t n = 0, std::uint64_t seed = 0) const;
};

/// mu = N(0, I_4) truncated to [-1, 1]^4, nu its pushforward under the
/// gradient map x -> scale x + offset.
struct GaussianMapBenchmark {
  static constexpr int kDim = 4;
  double scale = 0.8;
  double offset = 0.1;

  Domain domain_x() const { return Domain::cube(kDim, -1.0, 1.0); }
  Domain domain_y() const { return Domain::cube(kDim, offset - scale, offset + scale); }
  Point map(const Point& x) const;
  PointList sample_mu(std::size_t n, std::mt19937_64& rng) const;
  /// Images of fresh mu draws.
  PointList sample_nu(std::size_t n, std::mt19937_64& rng) const;
  /// (1 - scale)^2 d E[x_1^2] / 2 + d offset^2 / 2.
  double closed_form_reference() const;

  /// Fill set of l = 100 + n Sobol pairs and sample embeddings from n draws per side.
  OtProblem problem(std::size_t n, std::uint64_t seed, std::uint64_t replicate, const KernelSpec& marginal,
                    const KernelSpec& joint) const;
};

struct McReference {
  double value;
  double std_error;
  std::size_t samples;
};

/// Mean of 1/2 |x - T(x)|^2 over mu draws.
McReference monte_carlo_reference(const GaussianMapBenchmark& b, std::size_t samples, std::uint64_t seed);

/// f(x) = x^4 / 4 + x^2 / 2 on [-1, 1]; T^{-1} by bisection.
PotentialSpec quartic_potential();
/// f(x) = e^x on [-1, 1]; the remainder integrand is not polynomial, so
/// quadrature error is visible.
PotentialSpec exponential_potential();
/// f(x) = 1/2 x^T diag(a) x on [-1, 1]^d.
PotentialSpec diagonal_quadratic_potential(const Eigen::VectorXd& a);

}  // namespace ksot::app
