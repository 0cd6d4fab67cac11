#include "core/vec_ops.hpp"

#include <algorithm>
#include <cmath>

namespace oodcl::vec {

double norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

Embedding normalize(std::span<const double> v) {
  const double n = norm(v);
  if (!(n >= kZeroNormThreshold)) {
    throw ZeroVectorError("normalize: vector norm below 1e-12");
  }
  Embedding e;
  e.values.resize(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) e.values[i] = v[i] / n;
  return e;
}

double dot(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) {
    throw DimensionMismatchError("dot: dimensions " + std::to_string(u.size()) +
                                 " vs " + std::to_string(v.size()));
  }
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) s += u[i] * v[i];
  return s;
}

double log_sum_exp(std::span<const double> xs) {
  if (xs.empty()) throw EmptyInputError("log_sum_exp: empty input");
  const double m = *std::max_element(xs.begin(), xs.end());
  double s = 0.0;
  for (double x : xs) s += std::exp(x - m);
  return m + std::log(s);
}

Matrix pairwise_similarity(std::span<const Embedding> a,
                           std::span<const Embedding> b) {
  Matrix out(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) {
      out.at(i, j) = dot(a[i].span(), b[j].span());
    }
  }
  return out;
}

}  // namespace oodcl::vec
