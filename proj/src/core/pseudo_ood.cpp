#include "core/pseudo_ood.hpp"

#include <algorithm>
#include <random>

#include "core/errors.hpp"

namespace oodcl::pseudo {

void MixupConfig::validate() const {
  if (!(lambda_std > 0.0)) {
    throw ConfigError("mixup: lambda_std must be > 0");
  }
  if (!(clamp_lo < clamp_hi)) {
    throw ConfigError("mixup: clamp range must satisfy lo < hi");
  }
}

std::vector<std::size_t> nearest_other_class(std::span<const vec::Embedding> f,
                                             std::span<const int> labels) {
  if (f.size() != labels.size()) {
    throw DimensionMismatchError("nearest_other_class: features vs labels");
  }
  const bool multi_class =
      std::adjacent_find(labels.begin(), labels.end(),
                         [](int a, int b) { return a != b; }) != labels.end();
  if (labels.empty() || !multi_class) {
    throw SingleClassBatchError("nearest_other_class: need >= 2 classes");
  }
  std::vector<std::size_t> partner(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) {
    bool found = false;
    std::size_t best = 0;
    double best_sim = 0.0;
    for (std::size_t j = 0; j < f.size(); ++j) {
      if (labels[j] == labels[i]) continue;
      const double sim = vec::dot(f[i].span(), f[j].span());
      if (!found || sim > best_sim) {
        found = true;
        best = j;
        best_sim = sim;
      }
    }
    partner[i] = best;
  }
  return partner;
}

double draw_lambda(const MixupConfig& cfg, rng::Engine& eng) {
  std::normal_distribution<double> dist(cfg.lambda_mean, cfg.lambda_std);
  return std::clamp(dist(eng), cfg.clamp_lo, cfg.clamp_hi);
}

std::vector<vec::Embedding> mixup_pseudo_ood(std::span<const vec::Embedding> f,
                                             std::span<const int> labels,
                                             const MixupConfig& cfg,
                                             rng::Engine& eng) {
  cfg.validate();
  const auto partner = nearest_other_class(f, labels);
  std::vector<vec::Embedding> out;
  out.reserve(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double lambda = draw_lambda(cfg, eng);
    const auto& a = f[i].values;
    const auto& b = f[partner[i]].values;
    vec::Vector mixed(a.size());
    for (std::size_t d = 0; d < a.size(); ++d) {
      mixed[d] = lambda * a[d] + (1.0 - lambda) * b[d];
    }
    out.push_back(vec::normalize(mixed));
  }
  return out;
}

std::vector<vec::Embedding> assemble_ood_batch(
    std::optional<std::span<const vec::Embedding>> real,
    std::optional<std::span<const vec::Embedding>> pseudo, OodBatchMode mode) {
  const bool has_real = real && !real->empty();
  const bool has_pseudo = pseudo && !pseudo->empty();
  std::vector<vec::Embedding> out;
  switch (mode) {
    case OodBatchMode::RealOnly:
      if (!has_real) throw MissingInputError("ood batch: real side absent");
      out.assign(real->begin(), real->end());
      return out;
    case OodBatchMode::PseudoOnly:
      if (!has_pseudo) throw MissingInputError("ood batch: pseudo side absent");
      out.assign(pseudo->begin(), pseudo->end());
      return out;
    case OodBatchMode::Mixed:
      if (!has_real || !has_pseudo) {
        throw MissingInputError("ood batch: mixed mode needs both sides");
      }
      out.assign(real->begin(), real->end());
      out.insert(out.end(), pseudo->begin(), pseudo->end());
      return out;
  }
  throw MissingInputError("ood batch: unknown mode");
}

}  // namespace oodcl::pseudo
