#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "core/errors.hpp"

namespace oodcl::vec {

using Vector = std::vector<double>;

inline constexpr double kZeroNormThreshold = 1e-12;

// Dense row-major matrix, the only matrix shape the library needs.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
  std::span<double> row(std::size_t r) { return {data.data() + r * cols, cols}; }
  std::span<const double> row(std::size_t r) const {
    return {data.data() + r * cols, cols};
  }
};

// Unit-norm feature vector. Produced by normalize() and the network forward
// passes; code that constructs one directly is responsible for the norm.
struct Embedding {
  Vector values;

  std::size_t dim() const { return values.size(); }
  std::span<const double> span() const { return values; }
};

double norm(std::span<const double> v);

// v / ||v||. Throws ZeroVectorError when ||v|| < 1e-12.
Embedding normalize(std::span<const double> v);

// Inner product; DimensionMismatchError when sizes differ.
double dot(std::span<const double> u, std::span<const double> v);

// log(sum_i exp(xs[i])) via max-shift; finite for any finite input.
// Throws EmptyInputError on an empty vector.
double log_sum_exp(std::span<const double> xs);

// Entry (i, j) = dot(A[i], B[j]). All embeddings must share one dimension.
Matrix pairwise_similarity(std::span<const Embedding> a,
                           std::span<const Embedding> b);

}  // namespace oodcl::vec
