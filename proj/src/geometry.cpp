#include "ksot/geometry.hpp"

#include <cmath>
#include <limits>
#include <random>

#include "ksot/errors.hpp"
#include "ksot/sobol.hpp"

namespace ksot {
namespace {

constexpr double kGridBudget = 1e7;

void check_pair_count(std::size_t count) {
  if (count < 1) throw DomainError("fill set: need at least one pair");
}

}  // namespace

Domain::Domain(std::vector<std::pair<double, double>> b) : bounds(std::move(b)) {
  if (bounds.empty()) throw DomainError("domain: no dimensions");
  for (const auto& [lo, hi] : bounds) {
    if (!std::isfinite(lo) || !std::isfinite(hi) || !(lo < hi)) {
      throw DomainError("domain: bounds must be finite with low < high");
    }
  }
}

Domain Domain::cube(int dim, double low, double high) {
  return Domain(std::vector<std::pair<double, double>>(dim, {low, high}));
}

bool Domain::contains(const Point& p, double tol) const {
  if (p.size() != dim()) return false;
  for (int i = 0; i < dim(); ++i) {
    if (p[i] < bounds[i].first - tol || p[i] > bounds[i].second + tol) return false;
  }
  return true;
}

double Domain::volume() const {
  double v = 1.0;
  for (const auto& [lo, hi] : bounds) v *= hi - lo;
  return v;
}

Point Domain::from_unit(const double* unit) const {
  Point p(dim());
  for (int i = 0; i < dim(); ++i) {
    p[i] = bounds[i].first + unit[i] * (bounds[i].second - bounds[i].first);
  }
  return p;
}

PointList FillSet::joint() const {
  PointList out;
  out.reserve(xs.size());
  for (std::size_t j = 0; j < xs.size(); ++j) {
    Point z(xs[j].size() + ys[j].size());
    z << xs[j], ys[j];
    out.push_back(std::move(z));
  }
  return out;
}

FillSet sobol_pairs(const Domain& domain_x, const Domain& domain_y, std::size_t count) {
  check_pair_count(count);
  const int dx = domain_x.dim();
  const int dy = domain_y.dim();
  SobolSequence seq(dx + dy);
  seq.next();  // all-zeros point
  FillSet fs;
  fs.provenance = SobolProvenance{};
  fs.xs.reserve(count);
  fs.ys.reserve(count);
  for (std::size_t j = 0; j < count; ++j) {
    const auto u = seq.next();
    fs.xs.push_back(domain_x.from_unit(u.data()));
    fs.ys.push_back(domain_y.from_unit(u.data() + dx));
  }
  return fs;
}

FillSet uniform_pairs(const Domain& domain_x, const Domain& domain_y, std::size_t count,
                      std::uint64_t seed) {
  check_pair_count(count);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const int dx = domain_x.dim();
  const int dy = domain_y.dim();
  std::vector<double> u(dx + dy);
  FillSet fs;
  fs.provenance = UniformProvenance{seed};
  for (std::size_t j = 0; j < count; ++j) {
    for (auto& v : u) v = unif(rng);
    fs.xs.push_back(domain_x.from_unit(u.data()));
    fs.ys.push_back(domain_y.from_unit(u.data() + dx));
  }
  return fs;
}

FillSet product_pairs(const PointList& x_samples, const PointList& y_samples) {
  if (x_samples.empty() || y_samples.empty()) {
    throw DomainError("product_pairs: both sample lists must be nonempty");
  }
  FillSet fs;
  fs.provenance = ProductProvenance{};
  fs.xs.reserve(x_samples.size() * y_samples.size());
  fs.ys.reserve(x_samples.size() * y_samples.size());
  for (const auto& x : x_samples) {
    for (const auto& y : y_samples) {
      fs.xs.push_back(x);
      fs.ys.push_back(y);
    }
  }
  return fs;
}

int default_fill_grid(int joint_dim) {
  int g = 64;
  while (g > 2 && std::pow(static_cast<double>(g), joint_dim) > kGridBudget) --g;
  return g;
}

double fill_distance(const FillSet& fs, const Domain& domain_x, const Domain& domain_y,
                     int grid_per_dim) {
  if (fs.size() == 0) throw DomainError("fill_distance: empty fill set");
  if (grid_per_dim < 2) throw DomainError("fill_distance: grid_per_dim must be >= 2");
  const int dx = domain_x.dim();
  const int dim = dx + domain_y.dim();
  if (std::pow(static_cast<double>(grid_per_dim), dim) > kGridBudget) {
    throw BudgetError("fill_distance: grid exceeds the 1e7 node budget");
  }

  std::vector<std::pair<double, double>> joint_bounds = domain_x.bounds;
  joint_bounds.insert(joint_bounds.end(), domain_y.bounds.begin(), domain_y.bounds.end());
  const PointList fill = fs.joint();
  for (const auto& z : fill) {
    if (z.size() != dim) throw DimensionError("fill_distance: fill set dimension mismatch");
  }

  std::vector<int> idx(dim, 0);
  Point g(dim);
  double worst = 0.0;
  while (true) {
    for (int k = 0; k < dim; ++k) {
      const auto [lo, hi] = joint_bounds[k];
      g[k] = lo + (hi - lo) * idx[k] / (grid_per_dim - 1);
    }
    double best = std::numeric_limits<double>::infinity();
    for (const auto& z : fill) best = std::min(best, (z - g).squaredNorm());
    worst = std::max(worst, best);

    int k = 0;
    while (k < dim && ++idx[k] == grid_per_dim) idx[k++] = 0;
    if (k == dim) break;
  }
  return std::sqrt(worst);
}

PointList uniform_points(const Domain& domain, std::size_t count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<double> u(domain.dim());
  PointList out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    for (auto& v : u) v = unif(rng);
    out.push_back(domain.from_unit(u.data()));
  }
  return out;
}

}  // namespace ksot
