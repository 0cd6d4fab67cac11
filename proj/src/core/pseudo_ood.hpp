#pragma once

#include <optional>
#include <span>
#include <vector>

#include "core/rng.hpp"
#include "core/vec_ops.hpp"

namespace oodcl::pseudo {

struct MixupConfig {
  double lambda_mean = 0.5;
  double lambda_std = 0.3;
  double clamp_lo = 0.05;
  double clamp_hi = 0.95;

  void validate() const;
};

// For each sample, the index of the most similar feature with a different
// label (argmax of dot over other-class candidates, ties to the lowest
// index). Throws SingleClassBatchError when only one label is present.
std::vector<std::size_t> nearest_other_class(std::span<const vec::Embedding> f,
                                             std::span<const int> labels);

// One clamped draw from the mixing distribution.
double draw_lambda(const MixupConfig& cfg, rng::Engine& eng);

// Pseudo-OOD features: lambda * f_i + (1 - lambda) * f_partner, renormalized,
// with lambda ~ Normal(mean, std) clamped to [clamp_lo, clamp_hi]. One output
// per input, deterministic given the engine state.
std::vector<vec::Embedding> mixup_pseudo_ood(std::span<const vec::Embedding> f,
                                             std::span<const int> labels,
                                             const MixupConfig& cfg,
                                             rng::Engine& eng);

enum class OodBatchMode { RealOnly, PseudoOnly, Mixed };

// RealOnly -> real, PseudoOnly -> pseudo, Mixed -> real ++ pseudo. Throws
// MissingInputError when a required side is absent or empty.
std::vector<vec::Embedding> assemble_ood_batch(
    std::optional<std::span<const vec::Embedding>> real,
    std::optional<std::span<const vec::Embedding>> pseudo, OodBatchMode mode);

}  // namespace oodcl::pseudo
