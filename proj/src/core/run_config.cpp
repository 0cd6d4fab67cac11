#include "core/run_config.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace oodcl::config {

CliVariant variant_from_name(const std::string& name) {
  if (name == "psupcon") return CliVariant::PSupCon;
  if (name == "opsupcon-r") return CliVariant::OPSupConR;
  if (name == "opsupcon-p") return CliVariant::OPSupConP;
  if (name == "opsupcon-m") return CliVariant::OPSupConM;
  if (name == "ce") return CliVariant::Ce;
  if (name == "energy") return CliVariant::Energy;
  throw ConfigError("unknown variant '" + name +
                    "' (expected psupcon|opsupcon-r|opsupcon-p|opsupcon-m|ce|"
                    "energy)");
}

std::string variant_name(CliVariant v) {
  switch (v) {
    case CliVariant::PSupCon: return "psupcon";
    case CliVariant::OPSupConR: return "opsupcon-r";
    case CliVariant::OPSupConP: return "opsupcon-p";
    case CliVariant::OPSupConM: return "opsupcon-m";
    case CliVariant::Ce: return "ce";
    case CliVariant::Energy: return "energy";
  }
  return "unknown";
}

proto::ScoreFunction score_from_name(const std::string& name) {
  if (name == "maxlogit") return proto::ScoreFunction::MaxLogit;
  if (name == "msp") return proto::ScoreFunction::Msp;
  if (name == "energy") return proto::ScoreFunction::SumEnergy;
  throw ConfigError("unknown score '" + name +
                    "' (expected maxlogit|msp|energy)");
}

std::string score_name(proto::ScoreFunction f) {
  switch (f) {
    case proto::ScoreFunction::MaxLogit: return "maxlogit";
    case proto::ScoreFunction::Msp: return "msp";
    case proto::ScoreFunction::SumEnergy: return "energy";
  }
  return "unknown";
}

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

class KeyValues {
 public:
  void set(const std::string& key, const std::string& value) {
    values_[key] = value;
  }

  bool has(const std::string& key) const { return values_.count(key) > 0; }

  template <typename Parse>
  void take(const std::string& key, Parse&& parse) {
    auto it = values_.find(key);
    if (it == values_.end()) return;
    try {
      parse(it->second);
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      throw ConfigError("config key '" + key + "': bad value '" + it->second +
                        "' (" + e.what() + ")");
    }
    consumed_.push_back(key);
  }

  void finish() const {
    for (const auto& [key, value] : values_) {
      if (std::find(consumed_.begin(), consumed_.end(), key) ==
          consumed_.end()) {
        throw ConfigError("unknown config key '" + key + "'");
      }
    }
  }

 private:
  std::map<std::string, std::string> values_;
  std::vector<std::string> consumed_;
};

double to_double(const std::string& s) {
  std::size_t pos = 0;
  const double v = std::stod(s, &pos);
  if (pos != s.size()) throw std::invalid_argument("trailing characters");
  return v;
}

std::size_t to_size(const std::string& s) {
  const long long v = std::stoll(s);
  if (v < 0) throw std::invalid_argument("must be nonnegative");
  return std::size_t(v);
}

std::uint64_t to_seed(const std::string& s) {
  return std::stoull(s);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

}  // namespace

RunConfig parse_config(const std::filesystem::path& path,
                       const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot open config file '" + path.string() + "'");
  }

  KeyValues kv;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(path.string() + ":" + std::to_string(line_no) +
                        ": expected key=value, got '" + line + "'");
    }
    kv.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  for (const auto& ov : overrides) {
    const auto eq = ov.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("override must be key=value, got '" + ov + "'");
    }
    kv.set(trim(ov.substr(0, eq)), trim(ov.substr(eq + 1)));
  }

  RunConfig cfg;
  cfg.test_ood_sets = {data::OodKind::Shell, data::OodKind::Uniform,
                       data::OodKind::Interpolated};
  cfg.compare_variants = {CliVariant::Ce, CliVariant::PSupCon,
                          CliVariant::OPSupConR, CliVariant::OPSupConP};

  bool data_seed_set = false;
  bool train_seed_set = false;

  kv.take("data.n_classes", [&](const std::string& s) { cfg.spec.n_classes = to_size(s); });
  kv.take("data.input_dim", [&](const std::string& s) { cfg.spec.input_dim = to_size(s); });
  kv.take("data.samples_per_class", [&](const std::string& s) { cfg.spec.samples_per_class = to_size(s); });
  kv.take("data.test_samples_per_class", [&](const std::string& s) { cfg.test_samples_per_class = to_size(s); });
  kv.take("data.cluster_spread", [&](const std::string& s) { cfg.spec.cluster_spread = to_double(s); });
  kv.take("data.cluster_separation", [&](const std::string& s) { cfg.spec.cluster_separation = to_double(s); });
  kv.take("data.seed", [&](const std::string& s) {
    cfg.spec.seed = to_seed(s);
    data_seed_set = true;
  });
  kv.take("data.ood_sets", [&](const std::string& s) {
    cfg.test_ood_sets.clear();
    for (const auto& name : split_list(s)) {
      cfg.test_ood_sets.push_back(data::ood_kind_from_name(name));
    }
    if (cfg.test_ood_sets.empty()) {
      throw ConfigError("config key 'data.ood_sets': needs at least one set");
    }
  });
  kv.take("data.aux_kind", [&](const std::string& s) { cfg.aux_kind = data::ood_kind_from_name(s); });
  kv.take("data.aux_size", [&](const std::string& s) { cfg.aux_size = to_size(s); });
  kv.take("data.test_ood_size", [&](const std::string& s) { cfg.test_ood_size = to_size(s); });

  kv.take("augment.noise_std", [&](const std::string& s) { cfg.train.augment.noise_std = to_double(s); });
  kv.take("augment.scale_jitter", [&](const std::string& s) { cfg.train.augment.scale_jitter = to_double(s); });
  kv.take("augment.views_per_sample", [&](const std::string& s) { cfg.train.augment.views_per_sample = to_size(s); });

  kv.take("net.hidden_dim", [&](const std::string& s) { cfg.train.dims.hidden_dim = to_size(s); });
  kv.take("net.feat_dim", [&](const std::string& s) { cfg.train.dims.feat_dim = to_size(s); });
  kv.take("net.head_dim", [&](const std::string& s) { cfg.train.dims.head_dim = to_size(s); });

  kv.take("loss.tau", [&](const std::string& s) { cfg.train.loss.tau = to_double(s); });
  kv.take("loss.alpha", [&](const std::string& s) { cfg.train.loss.alpha = to_double(s); });
  kv.take("loss.gamma_real", [&](const std::string& s) { cfg.gamma_real = to_double(s); });
  kv.take("loss.gamma_pseudo", [&](const std::string& s) { cfg.gamma_pseudo = to_double(s); });

  kv.take("mixup.lambda_mean", [&](const std::string& s) { cfg.train.mixup.lambda_mean = to_double(s); });
  kv.take("mixup.lambda_std", [&](const std::string& s) { cfg.train.mixup.lambda_std = to_double(s); });
  kv.take("mixup.clamp_lo", [&](const std::string& s) { cfg.train.mixup.clamp_lo = to_double(s); });
  kv.take("mixup.clamp_hi", [&](const std::string& s) { cfg.train.mixup.clamp_hi = to_double(s); });

  kv.take("train.batch_size", [&](const std::string& s) { cfg.train.batch_size = to_size(s); });
  kv.take("train.pretrain_epochs", [&](const std::string& s) { cfg.train.pretrain_epochs = to_size(s); });
  kv.take("train.finetune_epochs", [&](const std::string& s) { cfg.train.finetune_epochs = to_size(s); });
  kv.take("train.base_lr", [&](const std::string& s) { cfg.train.base_lr = to_double(s); });
  kv.take("train.lr_min", [&](const std::string& s) { cfg.train.lr_min = to_double(s); });
  kv.take("train.momentum", [&](const std::string& s) { cfg.train.momentum = to_double(s); });
  kv.take("train.seed", [&](const std::string& s) {
    cfg.train.seed = to_seed(s);
    train_seed_set = true;
  });
  kv.take("train.prototype_lr_scale", [&](const std::string& s) { cfg.train.prototype_lr_scale = to_double(s); });
  kv.take("train.energy_weight", [&](const std::string& s) { cfg.train.energy_weight = to_double(s); });
  kv.take("train.pseudo_gradient_flow", [&](const std::string& s) {
    if (s != "0" && s != "1") throw std::invalid_argument("expected 0 or 1");
    cfg.train.pseudo_gradient_flow = s == "1";
  });

  kv.take("energy.temperature", [&](const std::string& s) { cfg.energy_temperature = to_double(s); });
  kv.take("energy.prototype_scale", [&](const std::string& s) { cfg.energy_prototype_scale = to_double(s); });

  kv.take("eval.score", [&](const std::string& s) { cfg.score = score_from_name(s); });
  kv.take("eval.temperature", [&](const std::string& s) { cfg.eval_temperature = to_double(s); });

  kv.take("compare.variants", [&](const std::string& s) {
    cfg.compare_variants.clear();
    for (const auto& name : split_list(s)) {
      cfg.compare_variants.push_back(variant_from_name(name));
    }
    if (cfg.compare_variants.empty()) {
      throw ConfigError("config key 'compare.variants': needs at least one");
    }
  });
  kv.take("out.dir", [&](const std::string& s) {
    if (s.empty()) throw ConfigError("config key 'out.dir': empty path");
    cfg.out_dir = s;
  });

  kv.finish();

  if (!data_seed_set || !train_seed_set) {
    if (const char* env = std::getenv("OODCL_SEED")) {
      const std::uint64_t env_seed = to_seed(env);
      if (!data_seed_set) cfg.spec.seed = env_seed;
      if (!train_seed_set) cfg.train.seed = env_seed;
    }
  }

  cfg.train.dims.input_dim = cfg.spec.input_dim;
  cfg.spec.validate();
  cfg.train.validate();
  if (!(cfg.energy_temperature > 0.0)) {
    throw ConfigError("config key 'energy.temperature': must be > 0");
  }
  if (!(cfg.energy_prototype_scale > 0.0)) {
    throw ConfigError("config key 'energy.prototype_scale': must be > 0");
  }
  if (!(cfg.eval_temperature > 0.0)) {
    throw ConfigError("config key 'eval.temperature': must be > 0");
  }
  if (cfg.gamma_real < 0.0 || cfg.gamma_pseudo < 0.0) {
    throw ConfigError("config: gamma weights must be >= 0");
  }
  if (cfg.test_samples_per_class == 0 || cfg.aux_size == 0 ||
      cfg.test_ood_size == 0) {
    throw ConfigError("config: dataset sizes must be positive");
  }
  return cfg;
}

}  // namespace oodcl::config
