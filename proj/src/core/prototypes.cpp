#include "core/prototypes.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "core/rng.hpp"

namespace oodcl::proto {

PrototypeSet init_prototypes(std::size_t k, std::size_t dim,
                             std::uint64_t seed) {
  if (k < 1 || dim < 2) {
    throw ConfigError("init_prototypes: need K >= 1 and dim >= 2");
  }
  auto eng = rng::make_engine(seed, rng::salt::kInitPrototypes);
  std::normal_distribution<double> dist(0.0, 1.0);
  PrototypeSet set;
  set.vectors = vec::Matrix(k, dim);
  set.class_ids.resize(k);
  std::iota(set.class_ids.begin(), set.class_ids.end(), 0);
  for (std::size_t r = 0; r < k; ++r) {
    vec::Vector raw(dim);
    for (double& x : raw) x = dist(eng);
    vec::Embedding unit = vec::normalize(raw);
    std::copy(unit.values.begin(), unit.values.end(), set.vectors.row(r).begin());
  }
  return set;
}

vec::Vector logits(const vec::Embedding& f, const PrototypeSet& protos) {
  if (f.dim() != protos.dim()) {
    throw DimensionMismatchError("logits: feature dim " +
                                 std::to_string(f.dim()) + " vs prototype dim " +
                                 std::to_string(protos.dim()));
  }
  vec::Vector out(protos.size());
  for (std::size_t k = 0; k < protos.size(); ++k) {
    out[k] = vec::dot(f.span(), protos.vectors.row(k));
  }
  return out;
}

int classify(const vec::Embedding& f, const PrototypeSet& protos) {
  vec::Vector l = logits(f, protos);
  std::size_t best = 0;
  for (std::size_t k = 1; k < l.size(); ++k) {
    if (l[k] > l[best]) best = k;
  }
  return protos.class_ids[best];
}

double score_logits(std::span<const double> logit_values,
                    ScoreFunction function, double t) {
  if (logit_values.empty()) throw EmptyInputError("score: no logits");
  switch (function) {
    case ScoreFunction::MaxLogit:
      return *std::max_element(logit_values.begin(), logit_values.end());
    case ScoreFunction::Msp: {
      if (!(t > 0.0)) throw ConfigError("score: MSP temperature must be > 0");
      vec::Vector scaled(logit_values.size());
      for (std::size_t i = 0; i < scaled.size(); ++i) {
        scaled[i] = logit_values[i] / t;
      }
      const double lse = vec::log_sum_exp(scaled);
      const double mx = *std::max_element(scaled.begin(), scaled.end());
      return std::exp(mx - lse);
    }
    case ScoreFunction::SumEnergy: {
      if (!(t > 0.0)) throw ConfigError("score: energy temperature must be > 0");
      vec::Vector scaled(logit_values.size());
      for (std::size_t i = 0; i < scaled.size(); ++i) {
        scaled[i] = logit_values[i] / t;
      }
      return t * vec::log_sum_exp(scaled);  // -energy
    }
  }
  throw ConfigError("score: unknown scoring function");
}

Score score(const vec::Embedding& f, const PrototypeSet& protos,
            ScoreFunction function, double t) {
  vec::Vector l = logits(f, protos);
  return Score{score_logits(l, function, t), function};
}

vec::Matrix scale_prototypes(const PrototypeSet& protos, double s) {
  if (!(s > 0.0)) {
    throw NonPositiveScaleError("scale_prototypes: scale must be > 0");
  }
  vec::Matrix scaled = protos.vectors;
  for (double& x : scaled.data) x *= s;
  return scaled;
}

}  // namespace oodcl::proto
