#include "core/commands.hpp"

#include <fstream>

#include "core/checkpoint.hpp"
#include "core/report.hpp"
#include "core/rng.hpp"

namespace oodcl::cmd {

namespace {

// The auxiliary set must not coincide with a test set of the same kind.
constexpr std::uint64_t kAuxStreamSalt = 0xa417;

data::Dataset require_dataset(const std::filesystem::path& path,
                              const std::string& what) {
  if (!std::filesystem::exists(path)) {
    throw ConfigError(what + " '" + path.string() +
                      "' not found (run gen-data first)");
  }
  return data::read_dataset(path);
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

std::string model_name_for(const std::filesystem::path& checkpoint_path) {
  std::string stem = checkpoint_path.stem().string();
  if (stem.rfind("checkpoint_", 0) == 0) stem = stem.substr(11);
  return stem;
}

train::EvalReport run_eval(const config::RunConfig& cfg,
                           const train::TrainedModel& model,
                           proto::ScoreFunction score) {
  data::Dataset id_test = require_dataset(cfg.id_test_path(), "ID test set");
  std::vector<data::Dataset> ood_sets;
  ood_sets.reserve(cfg.test_ood_sets.size());
  for (data::OodKind kind : cfg.test_ood_sets) {
    ood_sets.push_back(
        require_dataset(cfg.test_ood_path(kind), "OOD test set"));
  }
  return train::evaluate(model, id_test, ood_sets, score,
                         cfg.eval_temperature);
}

}  // namespace

std::string gen_data(const config::RunConfig& cfg) {
  std::filesystem::create_directories(cfg.out_dir);

  std::string summary;
  auto write = [&](const data::Dataset& ds, const std::filesystem::path& path) {
    data::write_dataset(ds, path);
    summary += path.string() + ": " + std::to_string(ds.size()) + " samples\n";
  };

  write(data::gen_id_dataset(cfg.spec), cfg.id_train_path());
  write(data::gen_id_testset(cfg.spec, cfg.test_samples_per_class),
        cfg.id_test_path());

  data::Dataset aux =
      data::gen_ood_dataset(cfg.aux_kind, cfg.spec,
                            rng::derive(cfg.spec.seed, kAuxStreamSalt),
                            cfg.aux_size);
  aux.name = "ood_aux";
  write(aux, cfg.aux_ood_path());

  for (data::OodKind kind : cfg.test_ood_sets) {
    write(data::gen_ood_dataset(kind, cfg.spec, cfg.spec.seed,
                                cfg.test_ood_size),
          cfg.test_ood_path(kind));
  }
  return summary;
}

std::string train(const config::RunConfig& cfg, config::CliVariant variant) {
  data::Dataset id_train =
      require_dataset(cfg.id_train_path(), "ID training set");

  auto needs_aux = [&]() {
    return require_dataset(cfg.aux_ood_path(), "auxiliary OOD set");
  };

  train::TrainConfig tcfg = cfg.train;
  train::TrainedModel model;
  switch (variant) {
    case config::CliVariant::PSupCon:
      model = train::pretrain(tcfg, id_train);
      break;
    case config::CliVariant::OPSupConR: {
      data::Dataset aux = needs_aux();
      model = train::pretrain(tcfg, id_train);
      tcfg.ood_mode = train::OodMode::RealOnly;
      tcfg.loss.variant = loss::Variant::OPSupConR;
      tcfg.loss.gamma = cfg.gamma_real;
      model = train::finetune(std::move(model), tcfg, id_train, &aux);
      break;
    }
    case config::CliVariant::OPSupConP: {
      model = train::pretrain(tcfg, id_train);
      tcfg.ood_mode = train::OodMode::PseudoOnly;
      tcfg.loss.variant = loss::Variant::OPSupConP;
      tcfg.loss.gamma = cfg.gamma_pseudo;
      model = train::finetune(std::move(model), tcfg, id_train, nullptr);
      break;
    }
    case config::CliVariant::OPSupConM: {
      data::Dataset aux = needs_aux();
      model = train::pretrain(tcfg, id_train);
      tcfg.ood_mode = train::OodMode::Mixed;
      tcfg.loss.variant = loss::Variant::OPSupConM;
      tcfg.loss.gamma = cfg.gamma_real;
      model = train::finetune(std::move(model), tcfg, id_train, &aux);
      break;
    }
    case config::CliVariant::Ce:
      model = train::train_ce_baseline(tcfg, id_train);
      break;
    case config::CliVariant::Energy: {
      data::Dataset aux = needs_aux();
      model = train::pretrain(tcfg, id_train);
      const auto [m_in, m_out] = train::estimate_energy_margins(
          model, id_train, aux, cfg.energy_temperature,
          cfg.energy_prototype_scale);
      loss::EnergyBaselineConfig ebc{m_in, m_out, cfg.energy_temperature,
                                     cfg.energy_prototype_scale};
      model =
          train::finetune_energy_baseline(std::move(model), tcfg, id_train,
                                          aux, ebc);
      break;
    }
  }

  const auto ckpt = cfg.checkpoint_path(variant);
  const auto hist = cfg.history_path(variant);
  checkpoint::save_model(model, ckpt);
  checkpoint::save_history(model, hist);

  std::string summary = "trained " + config::variant_name(variant) + ": " +
                        std::to_string(model.history.size()) + " epochs";
  if (!model.history.empty()) {
    char buf[64];
    std::snprintf(buf, sizeof buf, ", final loss %.6f",
                  model.history.back().total);
    summary += buf;
  }
  summary += "\ncheckpoint: " + ckpt.string() + "\nhistory: " + hist.string() +
             "\n";
  for (const auto& w : model.warnings) summary += "warning: " + w + "\n";
  return summary;
}

EvalOutput eval(const config::RunConfig& cfg,
                const std::filesystem::path& checkpoint_path,
                proto::ScoreFunction score) {
  if (!std::filesystem::exists(checkpoint_path)) {
    throw ConfigError("checkpoint '" + checkpoint_path.string() +
                      "' not found");
  }
  train::TrainedModel model = checkpoint::load_model(checkpoint_path);
  const train::EvalReport report = run_eval(cfg, model, score);

  EvalOutput out;
  const std::string model_name = model_name_for(checkpoint_path);
  out.json = report::to_json(model_name, config::score_name(score), report);
  std::filesystem::create_directories(cfg.out_dir);
  out.path = cfg.out_dir / ("report_" + model_name + "_" +
                            config::score_name(score) + ".json");
  write_text(out.path, out.json);
  return out;
}

CompareOutput compare(const config::RunConfig& cfg,
                      const std::vector<config::CliVariant>& variants) {
  if (variants.empty()) throw ConfigError("compare: no variants requested");
  std::vector<report::NamedReport> reports;
  reports.reserve(variants.size());
  for (config::CliVariant v : variants) {
    const auto path = cfg.checkpoint_path(v);
    if (!std::filesystem::exists(path)) {
      throw ConfigError("checkpoint '" + path.string() +
                        "' not found for variant " + config::variant_name(v));
    }
    train::TrainedModel model = checkpoint::load_model(path);
    reports.push_back(
        {config::variant_name(v), run_eval(cfg, model, cfg.score)});
  }

  CompareOutput out;
  out.table = report::compare_table(reports);
  out.json = report::compare_json(config::score_name(cfg.score), reports);
  std::filesystem::create_directories(cfg.out_dir);
  out.table_path = cfg.out_dir / "compare.txt";
  out.json_path = cfg.out_dir / "compare.json";
  write_text(out.table_path, out.table);
  write_text(out.json_path, out.json);
  return out;
}

}  // namespace oodcl::cmd
