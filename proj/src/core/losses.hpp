#pragma once

#include <span>
#include <utility>

#include "core/autodiff.hpp"
#include "core/prototypes.hpp"
#include "core/vec_ops.hpp"

namespace oodcl::loss {

enum class Variant { PSupCon, OPSupConR, OPSupConP, OPSupConM };

struct LossWeights {
  double tau = 0.1;    // shared temperature for every contrastive term
  double alpha = 0.1;  // weight of the encoder-level losses
  double gamma = 1.0;  // weight of the OOD head contrast
  Variant variant = Variant::PSupCon;

  void validate() const;
};

struct EnergyBaselineConfig {
  double m_in = 0.0;
  double m_out = 0.0;
  double temperature = 1.0;
  double prototype_scale = 1.0;

  void validate() const;
};

// ---------------------------------------------------------------------------
// Tape-side builders. Training and the plain wrappers below share these, so
// every loss has exactly one definition.
// ---------------------------------------------------------------------------

// Supervised contrastive loss over head embeddings: for each anchor with a
// nonempty positive set, mean over positives of -sim/tau + log sum_j!=i
// exp(sim/tau); anchors without positives are skipped, and the result is the
// mean over contributing anchors. Throws NoPositivePairsError when no anchor
// has a positive.
ad::NodeId supcon_node(ad::Tape& tape, std::span<const ad::NodeId> z,
                       std::span<const int> labels, double tau);

struct SupconParts {
  ad::NodeId tightness;
  ad::NodeId contrast;
};
SupconParts supcon_decomposed_node(ad::Tape& tape,
                                   std::span<const ad::NodeId> z,
                                   std::span<const int> labels, double tau);

// Prototype tightness on encoder features: mean of -(f_i . theta_{y_i}).
ad::NodeId tightness_node(ad::Tape& tape, std::span<const ad::NodeId> f,
                          std::span<const int> labels,
                          std::span<const ad::NodeId> protos,
                          std::span<const int> proto_class_ids);

// OOD contrast at the head: mean over OOD samples of log sum over ID head
// embeddings of exp(sim/tau).
ad::NodeId ood_head_node(ad::Tape& tape, std::span<const ad::NodeId> z_ood,
                         std::span<const ad::NodeId> z_id, double tau);

// OOD contrast at the encoder: mean over OOD samples of (1/K) log sum over
// prototypes of exp(sim/tau).
ad::NodeId ood_encoder_node(ad::Tape& tape, std::span<const ad::NodeId> f_ood,
                            std::span<const ad::NodeId> protos, double tau);

// Mean of -log softmax(logits_i)[y_i]; logits are length-K vector nodes.
ad::NodeId ce_node(ad::Tape& tape, std::span<const ad::NodeId> logit_nodes,
                   std::span<const int> labels);

// Scalar energy -T log sum exp(logits / T).
ad::NodeId energy_node(ad::Tape& tape, ad::NodeId logits_vec, double t);

// Squared-hinge gap: mean over ID of max(0, E - m_in)^2 plus mean over OOD of
// max(0, m_out - E)^2.
ad::NodeId energy_margin_node(ad::Tape& tape,
                              std::span<const ad::NodeId> id_logits,
                              std::span<const ad::NodeId> ood_logits,
                              const EnergyBaselineConfig& cfg);

// Inputs of the combined objective. OOD spans may be empty only when the
// variant does not use them.
struct BatchNodes {
  std::span<const ad::NodeId> z_id;
  std::span<const int> labels;
  std::span<const ad::NodeId> f_id;
  std::span<const ad::NodeId> z_ood;
  std::span<const ad::NodeId> f_ood;
  std::span<const ad::NodeId> protos;
  std::span<const int> proto_class_ids;
};

struct TotalParts {
  ad::NodeId total;
  ad::NodeId supcon;
  ad::NodeId tightness;     // invalid when alpha = 0
  ad::NodeId ood_head;      // invalid for PSupCon or gamma = 0
  ad::NodeId ood_encoder;   // invalid unless variant R/M with alpha > 0
};

// PSupCon:    supcon + alpha * tightness
// OPSupCon-R/M: supcon + gamma * ood_head + alpha * (tightness + ood_encoder)
// OPSupCon-P: supcon + gamma * ood_head + alpha * tightness
// Zero-weight terms are left out of the sum entirely, so degenerate weights
// reproduce the plain SupCon value bit for bit. Throws MissingOodError when a
// variant that needs OOD input gets none.
TotalParts total_node(ad::Tape& tape, const BatchNodes& batch,
                      const LossWeights& weights);

// ---------------------------------------------------------------------------
// Plain-value wrappers over the same graph builders.
// ---------------------------------------------------------------------------

double supcon_loss(std::span<const vec::Embedding> z,
                   std::span<const int> labels, double tau);
// (tightness, contrast); their sum equals supcon_loss to rounding.
std::pair<double, double> supcon_loss_decomposed(
    std::span<const vec::Embedding> z, std::span<const int> labels, double tau);
double tightness_loss(std::span<const vec::Embedding> f,
                      std::span<const int> labels,
                      const proto::PrototypeSet& protos);
double ood_head_contrast(std::span<const vec::Embedding> z_ood,
                         std::span<const vec::Embedding> z_id, double tau);
double ood_encoder_contrast(std::span<const vec::Embedding> f_ood,
                            const proto::PrototypeSet& protos, double tau);
double total_loss(std::span<const vec::Embedding> z_id,
                  std::span<const int> labels,
                  std::span<const vec::Embedding> f_id,
                  std::span<const vec::Embedding> f_ood,
                  std::span<const vec::Embedding> z_ood,
                  const proto::PrototypeSet& protos,
                  const LossWeights& weights);
double ce_loss(std::span<const vec::Vector> logits,
               std::span<const int> labels);
// Energy of one logit vector: -T log sum exp(logits / T). Lower = more ID.
double energy_score_sum(std::span<const double> logits, double t);
double energy_margin_loss(std::span<const vec::Vector> id_logits,
                          std::span<const vec::Vector> ood_logits,
                          const EnergyBaselineConfig& cfg);

}  // namespace oodcl::loss
