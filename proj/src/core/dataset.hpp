#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "core/rng.hpp"
#include "core/vec_ops.hpp"

namespace oodcl::data {

struct SyntheticSpec {
  std::size_t n_classes = 4;
  std::size_t input_dim = 16;
  std::size_t samples_per_class = 500;
  double cluster_spread = 0.5;
  double cluster_separation = 6.0;
  std::uint64_t seed = 1;

  void validate() const;
};

struct Dataset {
  std::vector<vec::Vector> inputs;
  std::vector<int> labels;  // empty for OOD sets
  std::string name;

  bool labeled() const { return !labels.empty(); }
  std::size_t size() const { return inputs.size(); }
  std::size_t dim() const { return inputs.empty() ? 0 : inputs[0].size(); }
};

struct AugmentSpec {
  double noise_std = 0.1;
  double scale_jitter = 0.0;
  std::size_t views_per_sample = 2;

  void validate() const;
};

enum class OodKind { Shell, Uniform, HeldOutClusters, Interpolated };

OodKind ood_kind_from_name(const std::string& name);
std::string ood_kind_name(OodKind kind);

// Cluster means drawn on a sphere of radius cluster_separation, re-drawn
// until every pair is at least cluster_separation apart (1000 attempts per
// mean, then PlacementFailureError). Samples are isotropic Gaussians around
// the means. Pure function of the spec.
Dataset gen_id_dataset(const SyntheticSpec& spec);

// Fresh draws around the same means as gen_id_dataset(spec).
Dataset gen_id_testset(const SyntheticSpec& spec,
                       std::size_t samples_per_class);

// Unlabeled OOD sets relative to the ID geometry of `spec`:
//   Shell            points on a sphere enclosing all ID samples
//   Uniform          uniform in the ID bounding box
//   HeldOutClusters  Gaussian clusters at fresh means (aux-OOD surrogate)
//   Interpolated     noisy midpoints of random cross-class ID pairs
Dataset gen_ood_dataset(OodKind kind, const SyntheticSpec& spec,
                        std::uint64_t seed, std::size_t n_samples);

// views_per_sample copies of (1 + u) * x + eps with u ~ U(-jitter, jitter)
// and eps ~ N(0, noise_std^2 I).
std::vector<vec::Vector> augment_views(std::span<const double> x,
                                       const AugmentSpec& aug,
                                       rng::Engine& eng);

// Text format: `# dim=<d> labeled=<0|1> n=<count>` then one comma-separated
// sample per line, label first when labeled, floats at 17 significant digits.
// Round-trips bit-exactly.
void write_dataset(const Dataset& ds, const std::filesystem::path& path);
Dataset read_dataset(const std::filesystem::path& path);

}  // namespace oodcl::data
