#include "ksot/sobol.hpp"

#include <array>
#include <bit>

#include "ksot/errors.hpp"

namespace ksot {
namespace {

constexpr int kBits = 32;

struct Primitive {
  int degree;
  unsigned coeffs;
  std::array<std::uint32_t, 8> m;
};

// Dimensions 2..16 of new-joe-kuo-6.21201.
constexpr std::array<Primitive, 15> kTable = {{
    {1, 0, {1}},
    {2, 1, {1, 3}},
    {3, 1, {1, 3, 1}},
    {3, 2, {1, 1, 1}},
    {4, 1, {1, 1, 3, 3}},
    {4, 4, {1, 3, 5, 13}},
    {5, 2, {1, 1, 5, 5, 17}},
    {5, 4, {1, 1, 5, 5, 5}},
    {5, 7, {1, 1, 7, 11, 19}},
    {5, 11, {1, 1, 5, 1, 1}},
    {5, 13, {1, 1, 1, 3, 11}},
    {5, 14, {1, 3, 5, 5, 31}},
    {6, 1, {1, 3, 3, 9, 7, 49}},
    {6, 13, {1, 1, 1, 15, 21, 21}},
    {6, 16, {1, 3, 1, 13, 27, 49}},
}};

}  // namespace

SobolSequence::SobolSequence(int dimension) : dimension_(dimension) {
  if (dimension < 1 || dimension > kMaxDimension) {
    throw DomainError("sobol: supported dimensions are 1.." + std::to_string(kMaxDimension));
  }
  state_.assign(dimension, 0u);
  directions_.assign(dimension, std::vector<std::uint32_t>(kBits + 1, 0u));

  for (int i = 1; i <= kBits; ++i) directions_[0][i] = 1u << (kBits - i);

  for (int j = 1; j < dimension; ++j) {
    const auto& prim = kTable[j - 1];
    const int s = prim.degree;
    auto& v = directions_[j];
    for (int i = 1; i <= s; ++i) v[i] = prim.m[i - 1] << (kBits - i);
    for (int i = s + 1; i <= kBits; ++i) {
      v[i] = v[i - s] ^ (v[i - s] >> s);
      for (int k = 1; k < s; ++k) {
        if ((prim.coeffs >> (s - 1 - k)) & 1u) v[i] ^= v[i - k];
      }
    }
  }
}

std::vector<double> SobolSequence::next() {
  std::vector<double> point(dimension_);
  constexpr double kScale = 1.0 / 4294967296.0;  // 2^-32
  for (int j = 0; j < dimension_; ++j) point[j] = state_[j] * kScale;

  // Advance by the direction number of the lowest zero bit of the index.
  const int c = std::countr_one(index_) + 1;
  if (c > kBits) throw BudgetError("sobol: sequence exhausted");
  for (int j = 0; j < dimension_; ++j) state_[j] ^= directions_[j][c];
  ++index_;
  return point;
}

}  // namespace ksot
