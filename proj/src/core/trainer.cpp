#include "core/trainer.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

namespace oodcl::train {

void TrainConfig::validate() const {
  dims.validate();
  loss.validate();
  mixup.validate();
  augment.validate();
  if (batch_size < 4) throw ConfigError("train: batch_size must be >= 4");
  if (!(base_lr > 0.0)) throw ConfigError("train: base_lr must be > 0");
  if (lr_min < 0.0) throw ConfigError("train: lr_min must be >= 0");
  if (momentum < 0.0 || momentum >= 1.0) {
    throw ConfigError("train: momentum must be in [0, 1)");
  }
  if (energy_weight < 0.0) {
    throw ConfigError("train: energy_weight must be >= 0");
  }
  if (!(prototype_lr_scale > 0.0)) {
    throw ConfigError("train: prototype_lr_scale must be > 0");
  }
}

double cosine_lr(std::size_t step, std::size_t total_steps, double base_lr,
                 double lr_min) {
  if (total_steps < 1) throw ConfigError("cosine_lr: total_steps must be >= 1");
  if (step > total_steps) throw ConfigError("cosine_lr: step > total_steps");
  const double t = double(step) / double(total_steps);
  return lr_min + 0.5 * (base_lr - lr_min) * (1.0 + std::cos(M_PI * t));
}

namespace {

struct BuiltObjective {
  ad::Tape tape;
  net::ParamNodes pnodes;
  std::vector<ad::NodeId> proto_nodes;
  loss::TotalParts parts;
};

std::vector<ad::NodeId> register_prototypes(ad::Tape& tape,
                                            const proto::PrototypeSet& protos) {
  std::vector<ad::NodeId> nodes;
  nodes.reserve(protos.size());
  for (std::size_t k = 0; k < protos.size(); ++k) {
    nodes.push_back(tape.param(protos.vectors.row(k)));
  }
  return nodes;
}

vec::Matrix collect_proto_grads(const ad::Tape& tape,
                                std::span<const ad::NodeId> nodes,
                                std::size_t dim) {
  vec::Matrix g(nodes.size(), dim);
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    auto gv = tape.grad(nodes[k]);
    std::copy(gv.begin(), gv.end(), g.row(k).begin());
  }
  return g;
}

BuiltObjective build_objective(const net::NetworkParams& params,
                               const proto::PrototypeSet& protos,
                               const StepBatch& batch,
                               const loss::LossWeights& weights) {
  BuiltObjective built;
  ad::Tape& tape = built.tape;
  const std::size_t n_views = batch.id_views.size();
  const std::size_t n_ood = batch.ood_inputs.size() +
                            batch.pseudo_features.size() +
                            batch.pseudo_mixes.size();
  tape.reserve(16 + 12 * n_views + (n_views + n_ood) * (n_views + n_ood),
               64 * (n_views + n_ood + protos.size()));

  built.pnodes = net::register_params(tape, params);
  built.proto_nodes = register_prototypes(tape, protos);

  std::vector<ad::NodeId> f_id, z_id;
  f_id.reserve(n_views);
  z_id.reserve(n_views);
  for (const auto& x : batch.id_views) {
    ad::NodeId f = net::encoder_node(tape, built.pnodes, params.dims, x);
    f_id.push_back(f);
    z_id.push_back(net::head_node(tape, built.pnodes, params.dims, f));
  }

  std::vector<ad::NodeId> f_ood, z_ood;
  f_ood.reserve(n_ood);
  z_ood.reserve(n_ood);
  for (const auto& x : batch.ood_inputs) {
    ad::NodeId f = net::encoder_node(tape, built.pnodes, params.dims, x);
    f_ood.push_back(f);
    z_ood.push_back(net::head_node(tape, built.pnodes, params.dims, f));
  }
  for (const auto& pf : batch.pseudo_features) {
    ad::NodeId f = tape.constant(pf.values);  // stop-gradient by construction
    f_ood.push_back(f);
    z_ood.push_back(net::head_node(tape, built.pnodes, params.dims, f));
  }
  for (const auto& mix : batch.pseudo_mixes) {
    ad::NodeId mixed =
        tape.add(tape.scale(f_id[mix.source], mix.lambda),
                 tape.scale(f_id[mix.partner], 1.0 - mix.lambda));
    ad::NodeId f = tape.normalize(mixed);
    f_ood.push_back(f);
    z_ood.push_back(net::head_node(tape, built.pnodes, params.dims, f));
  }

  loss::BatchNodes nodes{z_id,  batch.view_labels, f_id,
                         z_ood, f_ood,            built.proto_nodes,
                         protos.class_ids};
  built.parts = loss::total_node(tape, nodes, weights);
  return built;
}

StepValues read_values(const ad::Tape& tape, const loss::TotalParts& parts) {
  StepValues v;
  v.total = tape.scalar_value(parts.total);
  v.supcon = tape.scalar_value(parts.supcon);
  if (parts.tightness.valid()) v.tightness = tape.scalar_value(parts.tightness);
  if (parts.ood_head.valid()) v.ood_head = tape.scalar_value(parts.ood_head);
  if (parts.ood_encoder.valid()) {
    v.ood_encoder = tape.scalar_value(parts.ood_encoder);
  }
  return v;
}

}  // namespace

StepResult objective_gradients(const net::NetworkParams& params,
                               const proto::PrototypeSet& protos,
                               const StepBatch& batch,
                               const loss::LossWeights& weights) {
  BuiltObjective built = build_objective(params, protos, batch, weights);
  built.tape.backward(built.parts.total);
  StepResult res;
  res.values = read_values(built.tape, built.parts);
  res.param_grads = net::collect_grads(built.tape, built.pnodes, params.dims);
  res.proto_grads =
      collect_proto_grads(built.tape, built.proto_nodes, protos.dim());
  return res;
}

double objective_value(const net::NetworkParams& params,
                       const proto::PrototypeSet& protos,
                       const StepBatch& batch,
                       const loss::LossWeights& weights) {
  BuiltObjective built = build_objective(params, protos, batch, weights);
  return built.tape.scalar_value(built.parts.total);
}

namespace {

struct BuiltCe {
  ad::Tape tape;
  net::ParamNodes pnodes;
  ad::NodeId classifier;
  ad::NodeId loss;
};

BuiltCe build_ce(const net::NetworkParams& params, const vec::Matrix& classifier,
                 std::span<const vec::Vector> xs, std::span<const int> labels) {
  BuiltCe built;
  ad::Tape& tape = built.tape;
  tape.reserve(16 + 8 * xs.size(), 64 * xs.size());
  built.pnodes = net::register_params(tape, params);
  built.classifier = tape.param(classifier.data);
  std::vector<ad::NodeId> logit_nodes;
  logit_nodes.reserve(xs.size());
  for (const auto& x : xs) {
    ad::NodeId f = net::encoder_node(tape, built.pnodes, params.dims, x);
    logit_nodes.push_back(
        tape.matvec(built.classifier, f, classifier.rows, classifier.cols));
  }
  built.loss = loss::ce_node(tape, logit_nodes, labels);
  return built;
}

}  // namespace

CeStepResult ce_gradients(const net::NetworkParams& params,
                          const vec::Matrix& classifier,
                          std::span<const vec::Vector> xs,
                          std::span<const int> labels) {
  BuiltCe built = build_ce(params, classifier, xs, labels);
  built.tape.backward(built.loss);
  CeStepResult res;
  res.loss = built.tape.scalar_value(built.loss);
  res.param_grads = net::collect_grads(built.tape, built.pnodes, params.dims);
  res.classifier_grads = vec::Matrix(classifier.rows, classifier.cols);
  auto gv = built.tape.grad(built.classifier);
  std::copy(gv.begin(), gv.end(), res.classifier_grads.data.begin());
  return res;
}

double ce_value(const net::NetworkParams& params, const vec::Matrix& classifier,
                std::span<const vec::Vector> xs, std::span<const int> labels) {
  BuiltCe built = build_ce(params, classifier, xs, labels);
  return built.tape.scalar_value(built.loss);
}

namespace {

struct BuiltEnergy {
  ad::Tape tape;
  net::ParamNodes pnodes;
  std::vector<ad::NodeId> proto_nodes;
  loss::TotalParts preserve_parts;
  ad::NodeId margin;
  ad::NodeId total;
};

BuiltEnergy build_energy(const net::NetworkParams& params,
                         const proto::PrototypeSet& protos,
                         const StepBatch& batch,
                         const loss::LossWeights& weights,
                         const loss::EnergyBaselineConfig& ebc,
                         double margin_weight) {
  ebc.validate();
  if (batch.ood_inputs.empty()) {
    throw MissingOodError("energy finetuning requires an OOD batch");
  }
  BuiltEnergy built;
  ad::Tape& tape = built.tape;
  const std::size_t n = batch.id_views.size() + batch.ood_inputs.size();
  tape.reserve(16 + 16 * n + n * n, 64 * (n + protos.size()));

  built.pnodes = net::register_params(tape, params);
  built.proto_nodes = register_prototypes(tape, protos);
  std::vector<ad::NodeId> scaled;
  scaled.reserve(protos.size());
  for (ad::NodeId th : built.proto_nodes) {
    scaled.push_back(tape.scale(th, ebc.prototype_scale));
  }

  auto logits_of = [&](ad::NodeId f) {
    std::vector<ad::NodeId> dots;
    dots.reserve(scaled.size());
    for (ad::NodeId th : scaled) dots.push_back(tape.dot(f, th));
    return tape.stack(dots);
  };

  std::vector<ad::NodeId> f_id, z_id, id_logits;
  for (const auto& x : batch.id_views) {
    ad::NodeId f = net::encoder_node(tape, built.pnodes, params.dims, x);
    f_id.push_back(f);
    z_id.push_back(net::head_node(tape, built.pnodes, params.dims, f));
    id_logits.push_back(logits_of(f));
  }
  std::vector<ad::NodeId> ood_logits;
  for (const auto& x : batch.ood_inputs) {
    ad::NodeId f = net::encoder_node(tape, built.pnodes, params.dims, x);
    ood_logits.push_back(logits_of(f));
  }

  loss::LossWeights preserve = weights;
  preserve.variant = loss::Variant::PSupCon;
  loss::BatchNodes nodes{z_id, batch.view_labels, f_id,
                         {},   {},               built.proto_nodes,
                         protos.class_ids};
  built.preserve_parts = loss::total_node(tape, nodes, preserve);
  built.margin = loss::energy_margin_node(tape, id_logits, ood_logits, ebc);
  const std::array<ad::NodeId, 2> parts{built.preserve_parts.total,
                                        built.margin};
  const std::array<double, 2> coeffs{1.0, margin_weight};
  built.total = tape.lincomb(parts, coeffs);
  return built;
}

}  // namespace

EnergyStepResult energy_gradients(const net::NetworkParams& params,
                                  const proto::PrototypeSet& protos,
                                  const StepBatch& batch,
                                  const loss::LossWeights& weights,
                                  const loss::EnergyBaselineConfig& ebc,
                                  double margin_weight) {
  BuiltEnergy built =
      build_energy(params, protos, batch, weights, ebc, margin_weight);
  built.tape.backward(built.total);
  EnergyStepResult res;
  res.total = built.tape.scalar_value(built.total);
  res.preserve = built.tape.scalar_value(built.preserve_parts.total);
  res.margin = built.tape.scalar_value(built.margin);
  res.param_grads = net::collect_grads(built.tape, built.pnodes, params.dims);
  res.proto_grads =
      collect_proto_grads(built.tape, built.proto_nodes, protos.dim());
  return res;
}

double energy_value(const net::NetworkParams& params,
                    const proto::PrototypeSet& protos, const StepBatch& batch,
                    const loss::LossWeights& weights,
                    const loss::EnergyBaselineConfig& ebc,
                    double margin_weight) {
  BuiltEnergy built =
      build_energy(params, protos, batch, weights, ebc, margin_weight);
  return built.tape.scalar_value(built.total);
}

// ---------------------------------------------------------------------------
// Training loops
// ---------------------------------------------------------------------------

namespace {

void check_id_data(const data::Dataset& id_data) {
  if (id_data.size() == 0 || !id_data.labeled()) {
    throw EmptyInputError("training requires a labeled ID dataset");
  }
}

std::vector<int> distinct_labels(const data::Dataset& ds) {
  std::set<int> s(ds.labels.begin(), ds.labels.end());
  return {s.begin(), s.end()};
}

void renormalize_rows(vec::Matrix& m) {
  for (std::size_t r = 0; r < m.rows; ++r) {
    auto row = m.row(r);
    vec::Embedding unit = vec::normalize(row);
    std::copy(unit.values.begin(), unit.values.end(), row.begin());
  }
}

void sgd_update(std::span<double> value, std::span<const double> grad,
                std::vector<double>& velocity, double lr, double momentum) {
  if (momentum > 0.0) {
    if (velocity.empty()) velocity.assign(value.size(), 0.0);
    for (std::size_t i = 0; i < value.size(); ++i) {
      velocity[i] = momentum * velocity[i] + grad[i];
      value[i] -= lr * velocity[i];
    }
  } else {
    for (std::size_t i = 0; i < value.size(); ++i) value[i] -= lr * grad[i];
  }
}

enum class Phase { Contrastive, Ce, Energy };

struct PhasePlan {
  Phase phase = Phase::Contrastive;
  loss::LossWeights weights;
  OodMode ood_mode = OodMode::None;
  std::size_t epochs = 0;
  const data::Dataset* aux = nullptr;
  loss::EnergyBaselineConfig ebc;
  double margin_weight = 0.0;
};

// One engine block per epoch keyed by (seed, salt, epoch); phases that run
// the same epoch index over the same data replay identical batches.
struct EpochStreams {
  rng::Engine shuffle;
  rng::Engine augment;
  rng::Engine ood;
  rng::Engine mixup;

  EpochStreams(std::uint64_t seed, std::size_t epoch)
      : shuffle(rng::make_engine(seed, rng::salt::kShuffle, epoch)),
        augment(rng::make_engine(seed, rng::salt::kAugment, epoch)),
        ood(rng::make_engine(seed, rng::salt::kOodDraw, epoch)),
        mixup(rng::make_engine(seed, rng::salt::kMixup, epoch)) {}
};

void run_phase(TrainedModel& model, const TrainConfig& cfg,
               const data::Dataset& id_data, const PhasePlan& plan) {
  check_id_data(id_data);
  const std::size_t n = id_data.size();
  const std::size_t steps_per_epoch = (n + cfg.batch_size - 1) / cfg.batch_size;
  if (plan.epochs == 0) return;
  // Later phases continue the cosine decay where earlier epochs left off, so
  // finetuning runs at the schedule's tail instead of restarting at base_lr.
  const std::size_t step_offset = model.history.size() * steps_per_epoch;
  const std::size_t total_steps =
      step_offset + plan.epochs * steps_per_epoch;

  const bool wants_real =
      plan.ood_mode == OodMode::RealOnly || plan.ood_mode == OodMode::Mixed;
  const bool wants_pseudo =
      plan.ood_mode == OodMode::PseudoOnly || plan.ood_mode == OodMode::Mixed;
  if (wants_real && (plan.aux == nullptr || plan.aux->size() == 0)) {
    throw MissingOodError("this variant requires an auxiliary OOD dataset");
  }

  std::vector<std::vector<double>> velocity(9);  // 8 tensors + prototypes
  std::vector<double> classifier_velocity;
  bool single_class_warned = false;
  bool collapse_warned = false;

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);

  std::size_t global_step = step_offset;
  const std::size_t first_epoch = model.history.size();
  for (std::size_t epoch = 0; epoch < plan.epochs; ++epoch) {
    EpochStreams streams(cfg.seed, epoch);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), streams.shuffle);

    EpochStats stats;
    stats.epoch = first_epoch + epoch;
    stats.lr = cosine_lr(global_step, total_steps, cfg.base_lr, cfg.lr_min);
    double margin_sum = 0.0;

    for (std::size_t start = 0; start < n; start += cfg.batch_size) {
      const std::size_t stop = std::min(n, start + cfg.batch_size);

      StepBatch batch;
      batch.id_views.reserve((stop - start) * cfg.augment.views_per_sample);
      for (std::size_t b = start; b < stop; ++b) {
        const std::size_t idx = order[b];
        auto views =
            data::augment_views(id_data.inputs[idx], cfg.augment, streams.augment);
        for (auto& v : views) {
          batch.id_views.push_back(std::move(v));
          batch.view_labels.push_back(id_data.labels[idx]);
        }
      }
      if (wants_real) {
        std::uniform_int_distribution<std::size_t> pick(0, plan.aux->size() - 1);
        for (std::size_t b = start; b < stop; ++b) {
          batch.ood_inputs.push_back(plan.aux->inputs[pick(streams.ood)]);
        }
      }

      const double lr =
          cosine_lr(global_step, total_steps, cfg.base_lr, cfg.lr_min);
      ++global_step;

      // A randomly dead hidden layer collapses the normalization; the batch
      // is skipped rather than aborting the run. The skip pattern is a pure
      // function of (config, data), so determinism is preserved.
      try {
        loss::LossWeights weights = plan.weights;
        if (wants_pseudo) {
          const bool single_class =
              std::adjacent_find(batch.view_labels.begin(),
                                 batch.view_labels.end(),
                                 [](int a, int b) { return a != b; }) ==
              batch.view_labels.end();
          if (single_class) {
            if (plan.ood_mode == OodMode::PseudoOnly) {
              weights.variant = loss::Variant::PSupCon;
            }
            if (!single_class_warned) {
              model.warnings.push_back(
                  "single-class batch: pseudo-OOD generation skipped for the "
                  "affected steps");
              single_class_warned = true;
            }
          } else {
            std::vector<vec::Embedding> feats;
            feats.reserve(batch.id_views.size());
            for (const auto& x : batch.id_views) {
              feats.push_back(net::forward_encoder(model.params, x));
            }
            if (cfg.pseudo_gradient_flow) {
              // Partner choice and lambda draws are made on the current
              // feature values; the mixture itself is rebuilt on the tape.
              const auto partners =
                  pseudo::nearest_other_class(feats, batch.view_labels);
              batch.pseudo_mixes.reserve(feats.size());
              for (std::size_t i = 0; i < feats.size(); ++i) {
                batch.pseudo_mixes.push_back(
                    {i, partners[i],
                     pseudo::draw_lambda(cfg.mixup, streams.mixup)});
              }
            } else {
              batch.pseudo_features = pseudo::mixup_pseudo_ood(
                  feats, batch.view_labels, cfg.mixup, streams.mixup);
            }
          }
        }

        if (plan.phase == Phase::Ce) {
          CeStepResult res = ce_gradients(model.params, model.linear,
                                          batch.id_views, batch.view_labels);
          auto tensors = net::tensor_views(model.params);
          auto grads = net::tensor_views(res.param_grads);
          for (std::size_t t = 0; t < tensors.size(); ++t) {
            sgd_update(tensors[t], grads[t], velocity[t], lr, cfg.momentum);
          }
          sgd_update(model.linear.data, res.classifier_grads.data,
                     classifier_velocity, lr, cfg.momentum);
          stats.total += res.loss;
          continue;
        }

        StepValues values;
        net::NetworkGrads param_grads;
        vec::Matrix proto_grads;
        if (plan.phase == Phase::Energy) {
          EnergyStepResult res =
              energy_gradients(model.params, model.protos, batch, weights,
                               plan.ebc, plan.margin_weight);
          values.total = res.total;
          values.supcon = res.preserve;
          margin_sum += res.margin;
          param_grads = std::move(res.param_grads);
          proto_grads = std::move(res.proto_grads);
        } else {
          StepResult res =
              objective_gradients(model.params, model.protos, batch, weights);
          values = res.values;
          param_grads = std::move(res.param_grads);
          proto_grads = std::move(res.proto_grads);
        }

        auto tensors = net::tensor_views(model.params);
        auto grads = net::tensor_views(param_grads);
        for (std::size_t t = 0; t < tensors.size(); ++t) {
          sgd_update(tensors[t], grads[t], velocity[t], lr, cfg.momentum);
        }
        sgd_update(model.protos.vectors.data, proto_grads.data, velocity[8],
                   lr * cfg.prototype_lr_scale, cfg.momentum);
        renormalize_rows(model.protos.vectors);

        stats.supcon += values.supcon;
        stats.tightness += values.tightness;
        stats.ood_head += values.ood_head;
        stats.ood_encoder += values.ood_encoder;
        stats.total += values.total;
      } catch (const ZeroVectorError&) {
        if (!collapse_warned) {
          model.warnings.push_back(
              "batch skipped: a forward pass collapsed to the zero vector");
          collapse_warned = true;
        }
      }
    }

    const double inv = 1.0 / double(steps_per_epoch);
    stats.supcon *= inv;
    stats.tightness *= inv;
    stats.ood_head *= inv;
    stats.ood_encoder *= inv;
    stats.total *= inv;
    stats.energy_margin = margin_sum * inv;
    model.history.push_back(stats);
  }
}

}  // namespace

TrainedModel pretrain(const TrainConfig& cfg, const data::Dataset& id_data) {
  cfg.validate();
  check_id_data(id_data);
  const auto classes = distinct_labels(id_data);
  if (classes.size() < 2) {
    throw SingleClassBatchError("pretraining needs at least two classes");
  }

  TrainedModel model;
  model.kind = ClassifierKind::Prototypes;
  model.params = init_params(cfg.dims, cfg.seed);
  model.protos =
      proto::init_prototypes(classes.size(), cfg.dims.feat_dim, cfg.seed);
  model.protos.class_ids = classes;

  PhasePlan plan;
  plan.phase = Phase::Contrastive;
  plan.weights = cfg.loss;
  plan.weights.variant = loss::Variant::PSupCon;
  plan.ood_mode = OodMode::None;
  plan.epochs = cfg.pretrain_epochs;
  run_phase(model, cfg, id_data, plan);
  return model;
}

TrainedModel finetune(TrainedModel model, const TrainConfig& cfg,
                      const data::Dataset& id_data,
                      const data::Dataset* aux_ood) {
  cfg.validate();
  if (model.kind != ClassifierKind::Prototypes) {
    throw ConfigError("finetune: model must carry prototypes");
  }
  if ((cfg.ood_mode == OodMode::RealOnly || cfg.ood_mode == OodMode::Mixed) &&
      (aux_ood == nullptr || aux_ood->size() == 0)) {
    throw MissingOodError("finetune: variant requires the auxiliary OOD set");
  }
  if (cfg.ood_mode == OodMode::PseudoOnly && aux_ood != nullptr) {
    model.warnings.push_back(
        "auxiliary OOD dataset provided but unused by the pseudo-only variant");
  }

  PhasePlan plan;
  plan.phase = Phase::Contrastive;
  plan.weights = cfg.loss;
  plan.ood_mode = cfg.ood_mode;
  plan.epochs = cfg.finetune_epochs;
  plan.aux = cfg.ood_mode == OodMode::PseudoOnly ? nullptr : aux_ood;
  run_phase(model, cfg, id_data, plan);
  return model;
}

TrainedModel train_ce_baseline(const TrainConfig& cfg,
                               const data::Dataset& id_data) {
  cfg.validate();
  check_id_data(id_data);
  const auto classes = distinct_labels(id_data);

  TrainedModel model;
  model.kind = ClassifierKind::Linear;
  model.params = init_params(cfg.dims, cfg.seed);
  model.linear =
      proto::init_prototypes(classes.size(), cfg.dims.feat_dim, cfg.seed)
          .vectors;
  model.protos.class_ids = classes;

  PhasePlan plan;
  plan.phase = Phase::Ce;
  plan.epochs = cfg.pretrain_epochs;
  run_phase(model, cfg, id_data, plan);
  return model;
}

vec::Vector model_logits(const TrainedModel& model, const vec::Embedding& f) {
  if (model.kind == ClassifierKind::Prototypes) {
    return proto::logits(f, model.protos);
  }
  if (f.dim() != model.linear.cols) {
    throw DimensionMismatchError("model_logits: feature dim mismatch");
  }
  vec::Vector out(model.linear.rows);
  for (std::size_t r = 0; r < model.linear.rows; ++r) {
    out[r] = vec::dot(f.span(), model.linear.row(r));
  }
  return out;
}

std::pair<double, double> estimate_energy_margins(const TrainedModel& model,
                                                  const data::Dataset& id_data,
                                                  const data::Dataset& ood_data,
                                                  double temperature,
                                                  double prototype_scale) {
  if (id_data.size() == 0 || ood_data.size() == 0) {
    throw EmptyInputError("energy margins: datasets must be nonempty");
  }
  if (!(prototype_scale > 0.0)) {
    throw NonPositiveScaleError("energy margins: scale must be > 0");
  }
  auto mean_energy = [&](const data::Dataset& ds) {
    double sum = 0.0;
    for (const auto& x : ds.inputs) {
      vec::Vector l = model_logits(model, net::forward_encoder(model.params, x));
      for (double& v : l) v *= prototype_scale;
      sum += loss::energy_score_sum(l, temperature);
    }
    return sum / double(ds.size());
  };
  return {mean_energy(id_data), mean_energy(ood_data)};
}

TrainedModel finetune_energy_baseline(TrainedModel model,
                                      const TrainConfig& cfg,
                                      const data::Dataset& id_data,
                                      const data::Dataset& aux_ood,
                                      const loss::EnergyBaselineConfig& ebc) {
  cfg.validate();
  ebc.validate();
  if (model.kind != ClassifierKind::Prototypes) {
    throw ConfigError("energy finetuning: model must carry prototypes");
  }
  PhasePlan plan;
  plan.phase = Phase::Energy;
  plan.weights = cfg.loss;
  plan.weights.variant = loss::Variant::PSupCon;
  plan.ood_mode = OodMode::RealOnly;
  plan.epochs = cfg.finetune_epochs;
  plan.aux = &aux_ood;
  plan.ebc = ebc;
  plan.margin_weight = cfg.energy_weight;
  run_phase(model, cfg, id_data, plan);
  return model;
}

EvalReport evaluate(const TrainedModel& model, const data::Dataset& id_test,
                    std::span<const data::Dataset> ood_sets,
                    proto::ScoreFunction function, double temperature) {
  if (id_test.size() == 0 || !id_test.labeled()) {
    throw EmptyInputError("evaluate: labeled ID test set required");
  }
  if (ood_sets.empty()) throw EmptyInputError("evaluate: no OOD sets");

  std::vector<double> id_scores;
  id_scores.reserve(id_test.size());
  std::size_t correct = 0;
  for (std::size_t i = 0; i < id_test.size(); ++i) {
    const vec::Embedding f = net::forward_encoder(model.params, id_test.inputs[i]);
    const vec::Vector l = model_logits(model, f);
    std::size_t best = 0;
    for (std::size_t k = 1; k < l.size(); ++k) {
      if (l[k] > l[best]) best = k;
    }
    const int predicted = model.protos.class_ids.empty()
                              ? int(best)
                              : model.protos.class_ids[best];
    if (predicted == id_test.labels[i]) ++correct;
    id_scores.push_back(proto::score_logits(l, function, temperature));
  }

  std::vector<metrics::NamedScores> named;
  named.reserve(ood_sets.size());
  for (const auto& ood : ood_sets) {
    metrics::NamedScores ns;
    ns.name = ood.name;
    ns.scores.id_scores = id_scores;
    ns.scores.ood_scores.reserve(ood.size());
    for (const auto& x : ood.inputs) {
      const vec::Embedding f = net::forward_encoder(model.params, x);
      ns.scores.ood_scores.push_back(
          proto::score_logits(model_logits(model, f), function, temperature));
    }
    named.push_back(std::move(ns));
  }

  EvalReport report;
  report.id_accuracy = double(correct) / double(id_test.size());
  report.summary = metrics::evaluate_sets(named);
  report.function = function;
  return report;
}

}  // namespace oodcl::train
