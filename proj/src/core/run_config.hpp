#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "core/dataset.hpp"
#include "core/prototypes.hpp"
#include "core/trainer.hpp"

namespace oodcl::config {

enum class CliVariant { PSupCon, OPSupConR, OPSupConP, OPSupConM, Ce, Energy };

CliVariant variant_from_name(const std::string& name);
std::string variant_name(CliVariant v);
proto::ScoreFunction score_from_name(const std::string& name);
std::string score_name(proto::ScoreFunction f);

// Everything a command needs, parsed from a flat key=value file with section
// prefixes (e.g. `train.batch_size=64`). Unknown keys are errors. CLI
// overrides are applied on top as further key=value pairs; OODCL_SEED fills
// data.seed/train.seed when neither the file nor an override set them.
struct RunConfig {
  data::SyntheticSpec spec;
  std::size_t test_samples_per_class = 100;
  std::vector<data::OodKind> test_ood_sets;
  data::OodKind aux_kind = data::OodKind::HeldOutClusters;
  std::size_t aux_size = 2000;
  std::size_t test_ood_size = 1000;

  train::TrainConfig train;
  double gamma_real = 1.0;
  double gamma_pseudo = 0.5;
  double energy_temperature = 1.0;
  double energy_prototype_scale = 10.0;

  proto::ScoreFunction score = proto::ScoreFunction::MaxLogit;
  double eval_temperature = 1.0;
  std::vector<CliVariant> compare_variants;
  std::filesystem::path out_dir = "out";

  // Derived file locations.
  std::filesystem::path id_train_path() const { return out_dir / "id_train.csv"; }
  std::filesystem::path id_test_path() const { return out_dir / "id_test.csv"; }
  std::filesystem::path aux_ood_path() const { return out_dir / "ood_aux.csv"; }
  std::filesystem::path test_ood_path(data::OodKind kind) const {
    return out_dir / ("ood_" + data::ood_kind_name(kind) + ".csv");
  }
  std::filesystem::path checkpoint_path(CliVariant v) const {
    return out_dir / ("checkpoint_" + variant_name(v) + ".txt");
  }
  std::filesystem::path history_path(CliVariant v) const {
    return out_dir / ("history_" + variant_name(v) + ".txt");
  }
};

RunConfig parse_config(const std::filesystem::path& path,
                       const std::vector<std::string>& overrides);

}  // namespace oodcl::config
