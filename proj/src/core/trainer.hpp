#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "core/dataset.hpp"
#include "core/losses.hpp"
#include "core/metrics.hpp"
#include "core/network.hpp"
#include "core/prototypes.hpp"
#include "core/pseudo_ood.hpp"

namespace oodcl::train {

enum class OodMode { None, RealOnly, PseudoOnly, Mixed };

struct TrainConfig {
  net::NetworkDims dims{16, 32, 16, 8};
  loss::LossWeights loss{};
  pseudo::MixupConfig mixup{};
  data::AugmentSpec augment{};
  std::size_t batch_size = 64;
  std::size_t pretrain_epochs = 200;
  std::size_t finetune_epochs = 30;
  double base_lr = 0.5;
  double lr_min = 0.0;
  double momentum = 0.0;
  double energy_weight = 0.1;  // weight of the energy margin during finetuning
  std::uint64_t seed = 1;
  OodMode ood_mode = OodMode::None;
  double prototype_lr_scale = 1.0;
  // When set, pseudo features are built inside the training graph so their
  // gradient reaches the source ID features; otherwise they are constants.
  bool pseudo_gradient_flow = true;

  void validate() const;
};

struct EpochStats {
  std::size_t epoch = 0;
  double supcon = 0.0;
  double tightness = 0.0;
  double ood_head = 0.0;
  double ood_encoder = 0.0;
  double energy_margin = 0.0;
  double total = 0.0;
  double lr = 0.0;
};

enum class ClassifierKind { Prototypes, Linear };

struct TrainedModel {
  net::NetworkParams params;
  proto::PrototypeSet protos;  // Prototypes kind; rows stay unit-norm
  vec::Matrix linear;          // Linear kind; unnormalized classifier rows
  ClassifierKind kind = ClassifierKind::Prototypes;
  std::vector<EpochStats> history;
  std::vector<std::string> warnings;
};

// lr_min + 0.5 (base - lr_min) (1 + cos(pi step / total_steps)).
double cosine_lr(std::size_t step, std::size_t total_steps, double base_lr,
                 double lr_min);

// ---------------------------------------------------------------------------
// Single optimization step on an explicit batch. The trainer loops below are
// thin wrappers around these; tests drive them directly (finite differences,
// descent checks).
// ---------------------------------------------------------------------------

// A pseudo feature built inside the step's graph: the normalized mixture of
// two of the batch's own encoder features, so gradients reach the sources.
struct PseudoMix {
  std::size_t source = 0;
  std::size_t partner = 0;
  double lambda = 0.5;
};

struct StepBatch {
  std::vector<vec::Vector> id_views;   // augmented ID inputs, label per view
  std::vector<int> view_labels;
  std::vector<vec::Vector> ood_inputs;          // forwarded through E and H
  std::vector<vec::Embedding> pseudo_features;  // encoder-level constants
  std::vector<PseudoMix> pseudo_mixes;          // gradient-carrying mixtures
};

struct StepValues {
  double total = 0.0;
  double supcon = 0.0;
  double tightness = 0.0;
  double ood_head = 0.0;
  double ood_encoder = 0.0;
};

struct StepResult {
  StepValues values;
  net::NetworkGrads param_grads;
  vec::Matrix proto_grads;  // K x feat_dim
};

StepResult objective_gradients(const net::NetworkParams& params,
                               const proto::PrototypeSet& protos,
                               const StepBatch& batch,
                               const loss::LossWeights& weights);
double objective_value(const net::NetworkParams& params,
                       const proto::PrototypeSet& protos,
                       const StepBatch& batch,
                       const loss::LossWeights& weights);

struct CeStepResult {
  double loss = 0.0;
  net::NetworkGrads param_grads;
  vec::Matrix classifier_grads;
};

CeStepResult ce_gradients(const net::NetworkParams& params,
                          const vec::Matrix& classifier,
                          std::span<const vec::Vector> xs,
                          std::span<const int> labels);
double ce_value(const net::NetworkParams& params, const vec::Matrix& classifier,
                std::span<const vec::Vector> xs, std::span<const int> labels);

struct EnergyStepResult {
  double total = 0.0;
  double preserve = 0.0;  // the model's own training objective
  double margin = 0.0;
  net::NetworkGrads param_grads;
  vec::Matrix proto_grads;
};

EnergyStepResult energy_gradients(const net::NetworkParams& params,
                                  const proto::PrototypeSet& protos,
                                  const StepBatch& batch,
                                  const loss::LossWeights& weights,
                                  const loss::EnergyBaselineConfig& ebc,
                                  double margin_weight);
double energy_value(const net::NetworkParams& params,
                    const proto::PrototypeSet& protos, const StepBatch& batch,
                    const loss::LossWeights& weights,
                    const loss::EnergyBaselineConfig& ebc,
                    double margin_weight);

// ---------------------------------------------------------------------------
// Training protocols. All of them are deterministic functions of
// (config, datasets).
// ---------------------------------------------------------------------------

// Phase one: SGD on supcon + alpha * tightness over shuffled two-view
// batches; prototypes renormalized after every step.
TrainedModel pretrain(const TrainConfig& cfg, const data::Dataset& id_data);

// Phase two: SGD on the full objective for the configured variant. RealOnly
// pairs each ID batch with an equal-size auxiliary batch, PseudoOnly mixes
// pseudo features from the batch's own encoder output, Mixed does both.
TrainedModel finetune(TrainedModel model, const TrainConfig& cfg,
                      const data::Dataset& id_data,
                      const data::Dataset* aux_ood);

// Encoder plus linear classifier trained with cross-entropy on the same
// optimizer and schedule; classifier rows double as unnormalized prototypes
// for scoring.
TrainedModel train_ce_baseline(const TrainConfig& cfg,
                               const data::Dataset& id_data);

// Mean energies over both datasets, computed on prototype_scale-scaled
// logits.
std::pair<double, double> estimate_energy_margins(const TrainedModel& model,
                                                  const data::Dataset& id_data,
                                                  const data::Dataset& ood_data,
                                                  double temperature,
                                                  double prototype_scale);

// Energy-gap finetuning on top of a prototype model: the PSupCon objective
// plus the squared-hinge margin on scaled-prototype logits.
TrainedModel finetune_energy_baseline(TrainedModel model,
                                      const TrainConfig& cfg,
                                      const data::Dataset& id_data,
                                      const data::Dataset& aux_ood,
                                      const loss::EnergyBaselineConfig& ebc);

struct EvalReport {
  double id_accuracy = 0.0;
  metrics::EvalSummary summary;
  proto::ScoreFunction function = proto::ScoreFunction::MaxLogit;
};

vec::Vector model_logits(const TrainedModel& model, const vec::Embedding& f);

EvalReport evaluate(const TrainedModel& model, const data::Dataset& id_test,
                    std::span<const data::Dataset> ood_sets,
                    proto::ScoreFunction function, double temperature = 1.0);

}  // namespace oodcl::train
