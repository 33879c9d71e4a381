#include <cmath>
#include <random>

#include "doctest.h"
#include "ksot/embeddings.hpp"
#include "ksot/errors.hpp"

using namespace ksot;

namespace {

Point p1(double x) { return Point::Constant(1, x); }

Point p2(double x, double y) {
  Point p(2);
  p << x, y;
  return p;
}

}  // namespace

// Reference values below are mpmath quadratures at 25 digits.

TEST_CASE("exact gaussian embedding of a uniform interval") {
  const auto k = KernelSpec::gaussian(0.1);
  const MeasureSpec mu{MeasureSpec::UniformBox{}, Domain::cube(1, 0.0, 1.0)};
  const auto w = exact_embedding(mu, k);
  CHECK(w.closed_form());
  CHECK(w.method() == EmbeddingMethod::kExact);
  CHECK(w.value(p1(0.3)) == doctest::Approx(0.64616566078709417747).epsilon(1e-12));
  CHECK(w.value(p1(1.2)) == doctest::Approx(0.20884414510788562321).epsilon(1e-12));
  CHECK(w.norm_sq() == doctest::Approx(0.59277220862084417752).epsilon(1e-12));
}

TEST_CASE("exact gaussian embedding of a uniform box is a product") {
  const auto k = KernelSpec::gaussian(0.1);
  const MeasureSpec mu{MeasureSpec::UniformBox{}, Domain({{0.0, 1.0}, {-1.0, 2.0}})};
  const auto w = exact_embedding(mu, k);
  CHECK(w.value(p2(0.2, 0.5)) == doctest::Approx(0.15304746505827629908).epsilon(1e-12));
}

TEST_CASE("exact gaussian embedding of a truncated gaussian") {
  const auto k = KernelSpec::gaussian(0.1);
  MeasureSpec::TruncatedGaussian tg{Eigen::VectorXd::Constant(1, 0.2), Eigen::MatrixXd::Constant(1, 1, 0.5)};
  const MeasureSpec mu{tg, Domain::cube(1, -1.0, 1.0)};
  const auto w = exact_embedding(mu, k);
  CHECK(w.value(p1(0.4)) == doctest::Approx(0.47117502799568225129).epsilon(1e-9));
  CHECK(w.norm_sq() == doctest::Approx(0.39417456604008899349).epsilon(1e-9));
}

TEST_CASE("exact sobolev embeddings of an interval") {
  const MeasureSpec mu{MeasureSpec::UniformBox{}, Domain::cube(1, 0.0, 1.0)};
  const auto w05 = exact_embedding(mu, KernelSpec::sobolev(1.0, 1));
  CHECK(w05.value(p1(0.3)) == doctest::Approx(0.76259647552687261652).epsilon(1e-12));
  CHECK(w05.norm_sq() == doctest::Approx(0.73575888234288464319).epsilon(1e-12));
  const auto w15 = exact_embedding(mu, KernelSpec::sobolev(2.0, 1));
  CHECK(w15.value(p1(0.3)) == doctest::Approx(0.95533777219524321702).epsilon(1e-12));
  CHECK(w15.norm_sq() == doctest::Approx(0.94303552937153857276).epsilon(1e-12));
  CHECK(w15.gradient(p1(0.3))[0] == doctest::Approx(0.11886867044083705722).epsilon(1e-10));
  const MeasureSpec nu{MeasureSpec::UniformBox{}, Domain::cube(1, 0.3, 1.3)};
  CHECK(exact_embedding(nu, KernelSpec::sobolev(2.0, 1)).value(p1(1.4)) ==
        doctest::Approx(0.86825821841146856673).epsilon(1e-12));
}

TEST_CASE("embedding gradients match central differences") {
  const MeasureSpec mu{MeasureSpec::UniformBox{}, Domain({{0.0, 1.0}, {0.0, 2.0}})};
  const EmbeddingEstimate ws[] = {exact_embedding(mu, KernelSpec::gaussian(0.2)),
                                  exact_embedding(mu, KernelSpec::sobolev(2.5, 2), {8, 4})};
  const Point p = p2(0.37, 1.21);
  for (const auto& w : ws) {
    const Eigen::VectorXd g = w.gradient(p);
    for (int i = 0; i < 2; ++i) {
      Point a = p, b = p;
      a[i] += 1e-5;
      b[i] -= 1e-5;
      CHECK(g[i] == doctest::Approx((w.value(a) - w.value(b)) / 2e-5).epsilon(1e-5));
    }
  }
}

TEST_CASE("sample embedding formulas") {
  const auto k = KernelSpec::sobolev(1.5, 2);
  const PointList xs = {p2(0, 0), p2(1, 0), p2(0, 2)};
  const auto w = sample_embedding(xs, k);
  CHECK(w.method() == EmbeddingMethod::kSample);
  const Point q = p2(0.3, 0.4);
  double direct = 0.0;
  for (const auto& x : xs) direct += eval_kernel(k, x, q) / 3.0;
  CHECK(w.value(q) == doctest::Approx(direct).epsilon(1e-15));
  CHECK(w.norm_sq() == doctest::Approx(gram(k, xs).entries.sum() / 9.0).epsilon(1e-15));
  // a single atom: w = k(x, .), |w|^2 = 1
  CHECK(sample_embedding({p2(0.1, 0.1)}, k).norm_sq() == 1.0);
}

TEST_CASE("evaluation embedding approximates the exact embedding of a smooth density") {
  const auto k = KernelSpec::gaussian(0.1);
  const Domain dom = Domain::cube(1, 0.0, 1.0);
  const PointList pts = uniform_points(dom, 60, 3);
  MeasureSpec::DensityEvals ev{pts, std::vector<double>(pts.size(), 1.0)};
  const auto w_eval = evaluation_embedding(MeasureSpec{ev, dom}, k);
  const auto w_exact = exact_embedding(MeasureSpec{MeasureSpec::UniformBox{}, dom}, k);
  CHECK(w_eval.method() == EmbeddingMethod::kEvaluation);
  for (double x : {0.1, 0.5, 0.9}) CHECK(std::abs(w_eval.value(p1(x)) - w_exact.value(p1(x))) < 0.02);
  CHECK(std::abs(w_eval.norm_sq() - w_exact.norm_sq()) < 0.02);
}

TEST_CASE("make_embedding dispatches on the measure kind") {
  const auto k = KernelSpec::gaussian(0.5);
  const Domain dom = Domain::cube(1, 0.0, 1.0);
  CHECK(make_embedding(MeasureSpec{MeasureSpec::Samples{{p1(0.2)}}, dom}, k).method() == EmbeddingMethod::kSample);
  CHECK(make_embedding(MeasureSpec{MeasureSpec::UniformBox{}, dom}, k).method() == EmbeddingMethod::kExact);
  CHECK_THROWS_AS(make_embedding(MeasureSpec{MeasureSpec::Samples{{p2(0.2, 0.1)}}, dom}, KernelSpec::sobolev(1.0, 1)),
                  DimensionError);
}

TEST_CASE("sample embedding error shrinks with the sample size") {
  const auto k = KernelSpec::gaussian(0.1);
  const Domain dom = Domain::cube(1, 0.0, 1.0);
  const auto exact = exact_embedding(MeasureSpec{MeasureSpec::UniformBox{}, dom}, k);
  double prev = 1e9;
  for (std::size_t n : {10u, 100u, 1000u}) {
    double total = 0.0;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const auto w = sample_embedding(uniform_points(dom, n, seed), k);
      double sup = 0.0;
      for (int i = 0; i < 20; ++i) sup = std::max(sup, std::abs(w.value(p1(i / 19.0)) - exact.value(p1(i / 19.0))));
      total += sup;
    }
    CHECK(total < prev);
    prev = total;
  }
}
