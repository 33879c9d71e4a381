#pragma once

#include <cstdint>
#include <utility>
#include <variant>
#include <vector>

#include "ksot/types.hpp"

namespace ksot {

/// Axis-aligned box.
struct Domain {
  std::vector<std::pair<double, double>> bounds;

  Domain() = default;
  explicit Domain(std::vector<std::pair<double, double>> b);

  /// The box [low, high]^dim.
  static Domain cube(int dim, double low, double high);

  int dim() const { return static_cast<int>(bounds.size()); }
  bool contains(const Point& p, double tol = 0.0) const;
  double volume() const;
  /// Maps a point of the unit cube affinely into the box.
  Point from_unit(const double* unit) const;
};

struct SobolProvenance {};
struct UniformProvenance {
  std::uint64_t seed;
};
struct ProductProvenance {};

/// Constraint-subsampling pairs (x_j, y_j).
struct FillSet {
  PointList xs;
  PointList ys;
  std::variant<SobolProvenance, UniformProvenance, ProductProvenance> provenance;

  std::size_t size() const { return xs.size(); }
  /// Concatenated (x_j, y_j) in the joint space.
  PointList joint() const;
};

/// First `count` Sobol points of dimension dim_x + dim_y (the all-zeros point
/// is skipped), mapped into domain_x x domain_y and split coordinate-wise.
FillSet sobol_pairs(const Domain& domain_x, const Domain& domain_y, std::size_t count);

/// `count` i.i.d. uniform pairs from the product box, reproducible per seed.
FillSet uniform_pairs(const Domain& domain_x, const Domain& domain_y, std::size_t count,
                      std::uint64_t seed);

/// All |x| * |y| pairs in row-major order (x outer, y inner).
FillSet product_pairs(const PointList& x_samples, const PointList& y_samples);

/// Largest distance from a regular grid on the joint box (boundary nodes
/// included) to the nearest fill pair. A lower bound on the true fill distance.
double fill_distance(const FillSet& fs, const Domain& domain_x, const Domain& domain_y,
                     int grid_per_dim);

/// 64 nodes per joint dimension, reduced until the grid fits the 1e7 node budget.
int default_fill_grid(int joint_dim);

/// Uniform sampling of n points in a box.
PointList uniform_points(const Domain& domain, std::size_t count, std::uint64_t seed);

}  // namespace ksot
