#pragma once

#include <cstdint>
#include <vector>

#include "core/vec_ops.hpp"

namespace oodcl::proto {

// K unit-norm class prototypes with their class ids.
struct PrototypeSet {
  vec::Matrix vectors;          // K x feat_dim, rows unit-norm
  std::vector<int> class_ids;   // distinct

  std::size_t size() const { return vectors.rows; }
  std::size_t dim() const { return vectors.cols; }
};

enum class ScoreFunction { MaxLogit, Msp, SumEnergy };

struct Score {
  double value = 0.0;  // higher = more in-distribution
  ScoreFunction function = ScoreFunction::MaxLogit;
};

// K independent random unit rows; class ids 0..K-1. Deterministic given seed.
PrototypeSet init_prototypes(std::size_t k, std::size_t dim,
                             std::uint64_t seed);

// Entry k = f . theta_k.
vec::Vector logits(const vec::Embedding& f, const PrototypeSet& protos);

// class_id of the nearest prototype by dot product; ties break to the lowest
// prototype index.
int classify(const vec::Embedding& f, const PrototypeSet& protos);

// MaxLogit: max_k logit_k. Msp: max softmax(logits / t). SumEnergy: negated
// energy t*log sum exp(logits / t), so every function scores higher for more
// in-distribution inputs.
Score score(const vec::Embedding& f, const PrototypeSet& protos,
            ScoreFunction function, double t = 1.0);

// Same scoring functions on a precomputed logit vector.
double score_logits(std::span<const double> logit_values,
                    ScoreFunction function, double t = 1.0);

// Rows multiplied by s > 0; the result is a plain matrix because its rows are
// no longer unit-norm. Throws NonPositiveScaleError otherwise.
vec::Matrix scale_prototypes(const PrototypeSet& protos, double s);

}  // namespace oodcl::proto
