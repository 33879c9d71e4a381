#pragma once

#include <cstdint>
#include <vector>

namespace ksot {

/// Unscrambled Sobol sequence (Joe-Kuo direction numbers, Gray-code order)
/// in up to kMaxDimension dimensions.
class SobolSequence {
 public:
  static constexpr int kMaxDimension = 16;

  explicit SobolSequence(int dimension);

  int dimension() const { return dimension_; }

  /// Returns the next point. The first call returns the all-zeros point.
  std::vector<double> next();

 private:
  int dimension_;
  std::uint64_t index_ = 0;
  std::vector<std::uint32_t> state_;
  std::vector<std::vector<std::uint32_t>> directions_;
};

}  // namespace ksot
