#include "core/losses.hpp"

#include <algorithm>
#include <array>
#include <string>
#include <vector>

namespace oodcl::loss {

void LossWeights::validate() const {
  if (!(tau > 0.0)) throw ConfigError("loss weights: tau must be > 0");
  if (alpha < 0.0 || gamma < 0.0) {
    throw ConfigError("loss weights: alpha and gamma must be >= 0");
  }
}

void EnergyBaselineConfig::validate() const {
  if (!(temperature > 0.0)) {
    throw ConfigError("energy baseline: temperature must be > 0");
  }
  if (!(prototype_scale > 0.0)) {
    throw NonPositiveScaleError("energy baseline: prototype scale must be > 0");
  }
}

namespace {

// Scaled similarity nodes t(i,j) = dot(z_i, z_j)/tau for i < j, built once and
// shared between anchors (the pair similarity is symmetric).
class PairSims {
 public:
  PairSims(ad::Tape& tape, std::span<const ad::NodeId> z, double tau)
      : n_(z.size()), nodes_(n_ * n_) {
    for (std::size_t i = 0; i < n_; ++i) {
      for (std::size_t j = i + 1; j < n_; ++j) {
        ad::NodeId t = tape.scale(tape.dot(z[i], z[j]), 1.0 / tau);
        nodes_[i * n_ + j] = t;
        nodes_[j * n_ + i] = t;
      }
    }
  }

  ad::NodeId at(std::size_t i, std::size_t j) const { return nodes_[i * n_ + j]; }

 private:
  std::size_t n_;
  std::vector<ad::NodeId> nodes_;
};

std::vector<std::vector<std::size_t>> positive_sets(
    std::span<const int> labels) {
  std::vector<std::vector<std::size_t>> pos(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    for (std::size_t j = 0; j < labels.size(); ++j) {
      if (j != i && labels[j] == labels[i]) pos[i].push_back(j);
    }
  }
  return pos;
}

void check_supcon_inputs(std::span<const ad::NodeId> z,
                         std::span<const int> labels) {
  if (z.size() != labels.size()) {
    throw DimensionMismatchError("supcon: embeddings vs labels count");
  }
  if (z.size() < 2) {
    throw NoPositivePairsError("supcon: batch needs at least two embeddings");
  }
}

std::size_t proto_row_for_label(std::span<const int> class_ids, int label) {
  for (std::size_t k = 0; k < class_ids.size(); ++k) {
    if (class_ids[k] == label) return k;
  }
  throw UnknownClassError("no prototype for class " + std::to_string(label));
}

ad::NodeId mean_of(ad::Tape& tape, std::span<const ad::NodeId> terms) {
  std::vector<double> coeffs(terms.size(), 1.0 / double(terms.size()));
  return tape.lincomb(terms, coeffs);
}

}  // namespace

ad::NodeId supcon_node(ad::Tape& tape, std::span<const ad::NodeId> z,
                       std::span<const int> labels, double tau) {
  check_supcon_inputs(z, labels);
  const auto pos = positive_sets(labels);
  PairSims sims(tape, z, tau);

  std::vector<ad::NodeId> anchor_terms;
  for (std::size_t i = 0; i < z.size(); ++i) {
    if (pos[i].empty()) continue;
    std::vector<ad::NodeId> others;
    others.reserve(z.size() - 1);
    for (std::size_t j = 0; j < z.size(); ++j) {
      if (j != i) others.push_back(sims.at(i, j));
    }
    ad::NodeId lse = tape.log_sum_exp(tape.stack(others));
    // term_i = (1/|P_i|) sum_p (-t_ip) + lse_i
    std::vector<ad::NodeId> parts;
    std::vector<double> coeffs;
    for (std::size_t p : pos[i]) {
      parts.push_back(sims.at(i, p));
      coeffs.push_back(-1.0 / double(pos[i].size()));
    }
    parts.push_back(lse);
    coeffs.push_back(1.0);
    anchor_terms.push_back(tape.lincomb(parts, coeffs));
  }
  if (anchor_terms.empty()) {
    throw NoPositivePairsError("supcon: no anchor has a positive pair");
  }
  return mean_of(tape, anchor_terms);
}

SupconParts supcon_decomposed_node(ad::Tape& tape,
                                   std::span<const ad::NodeId> z,
                                   std::span<const int> labels, double tau) {
  check_supcon_inputs(z, labels);
  const auto pos = positive_sets(labels);
  PairSims sims(tape, z, tau);

  std::vector<ad::NodeId> tight_terms;
  std::vector<ad::NodeId> contrast_terms;
  for (std::size_t i = 0; i < z.size(); ++i) {
    if (pos[i].empty()) continue;
    std::vector<ad::NodeId> parts;
    std::vector<double> coeffs;
    for (std::size_t p : pos[i]) {
      parts.push_back(sims.at(i, p));
      coeffs.push_back(-1.0 / double(pos[i].size()));
    }
    tight_terms.push_back(tape.lincomb(parts, coeffs));

    std::vector<ad::NodeId> others;
    for (std::size_t j = 0; j < z.size(); ++j) {
      if (j != i) others.push_back(sims.at(i, j));
    }
    contrast_terms.push_back(tape.log_sum_exp(tape.stack(others)));
  }
  if (tight_terms.empty()) {
    throw NoPositivePairsError("supcon: no anchor has a positive pair");
  }
  return SupconParts{mean_of(tape, tight_terms), mean_of(tape, contrast_terms)};
}

ad::NodeId tightness_node(ad::Tape& tape, std::span<const ad::NodeId> f,
                          std::span<const int> labels,
                          std::span<const ad::NodeId> protos,
                          std::span<const int> proto_class_ids) {
  if (f.size() != labels.size()) {
    throw DimensionMismatchError("tightness: features vs labels count");
  }
  if (f.empty()) throw EmptyInputError("tightness: empty batch");
  std::vector<ad::NodeId> dots;
  dots.reserve(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) {
    const std::size_t row = proto_row_for_label(proto_class_ids, labels[i]);
    dots.push_back(tape.dot(f[i], protos[row]));
  }
  std::vector<double> coeffs(dots.size(), -1.0 / double(dots.size()));
  return tape.lincomb(dots, coeffs);
}

ad::NodeId ood_head_node(ad::Tape& tape, std::span<const ad::NodeId> z_ood,
                         std::span<const ad::NodeId> z_id, double tau) {
  if (z_ood.empty() || z_id.empty()) {
    throw EmptyInputError("ood head contrast: empty input list");
  }
  std::vector<ad::NodeId> terms;
  terms.reserve(z_ood.size());
  for (ad::NodeId zo : z_ood) {
    std::vector<ad::NodeId> sims;
    sims.reserve(z_id.size());
    for (ad::NodeId zi : z_id) {
      sims.push_back(tape.scale(tape.dot(zo, zi), 1.0 / tau));
    }
    terms.push_back(tape.log_sum_exp(tape.stack(sims)));
  }
  return mean_of(tape, terms);
}

ad::NodeId ood_encoder_node(ad::Tape& tape, std::span<const ad::NodeId> f_ood,
                            std::span<const ad::NodeId> protos, double tau) {
  if (f_ood.empty() || protos.empty()) {
    throw EmptyInputError("ood encoder contrast: empty input list");
  }
  const double k = double(protos.size());
  std::vector<ad::NodeId> terms;
  terms.reserve(f_ood.size());
  for (ad::NodeId fo : f_ood) {
    std::vector<ad::NodeId> sims;
    sims.reserve(protos.size());
    for (ad::NodeId th : protos) {
      sims.push_back(tape.scale(tape.dot(fo, th), 1.0 / tau));
    }
    // the 1/K factor scales each sample's log term, as printed
    terms.push_back(tape.scale(tape.log_sum_exp(tape.stack(sims)), 1.0 / k));
  }
  return mean_of(tape, terms);
}

ad::NodeId ce_node(ad::Tape& tape, std::span<const ad::NodeId> logit_nodes,
                   std::span<const int> labels) {
  if (logit_nodes.size() != labels.size()) {
    throw DimensionMismatchError("ce: logits vs labels count");
  }
  if (logit_nodes.empty()) throw EmptyInputError("ce: empty batch");
  std::vector<ad::NodeId> terms;
  terms.reserve(logit_nodes.size());
  for (std::size_t i = 0; i < logit_nodes.size(); ++i) {
    const std::size_t k = tape.value(logit_nodes[i]).size();
    if (labels[i] < 0 || std::size_t(labels[i]) >= k) {
      throw UnknownClassError("ce: label " + std::to_string(labels[i]) +
                              " outside logit range");
    }
    ad::NodeId lse = tape.log_sum_exp(logit_nodes[i]);
    ad::NodeId picked = tape.pick(logit_nodes[i], std::size_t(labels[i]));
    const std::array<ad::NodeId, 2> parts{lse, picked};
    const std::array<double, 2> coeffs{1.0, -1.0};
    terms.push_back(tape.lincomb(parts, coeffs));
  }
  return mean_of(tape, terms);
}

ad::NodeId energy_node(ad::Tape& tape, ad::NodeId logits_vec, double t) {
  if (!(t > 0.0)) throw ConfigError("energy: temperature must be > 0");
  return tape.scale(tape.log_sum_exp(tape.scale(logits_vec, 1.0 / t)), -t);
}

ad::NodeId energy_margin_node(ad::Tape& tape,
                              std::span<const ad::NodeId> id_logits,
                              std::span<const ad::NodeId> ood_logits,
                              const EnergyBaselineConfig& cfg) {
  cfg.validate();
  if (id_logits.empty() || ood_logits.empty()) {
    throw EmptyInputError("energy margin: empty input list");
  }
  std::vector<ad::NodeId> id_sq;
  id_sq.reserve(id_logits.size());
  for (ad::NodeId l : id_logits) {
    ad::NodeId e = energy_node(tape, l, cfg.temperature);
    ad::NodeId h = tape.relu(tape.add_scalar(e, -cfg.m_in));
    id_sq.push_back(tape.mul(h, h));
  }
  std::vector<ad::NodeId> ood_sq;
  ood_sq.reserve(ood_logits.size());
  for (ad::NodeId l : ood_logits) {
    ad::NodeId e = energy_node(tape, l, cfg.temperature);
    ad::NodeId h = tape.relu(tape.add_scalar(tape.scale(e, -1.0), cfg.m_out));
    ood_sq.push_back(tape.mul(h, h));
  }
  const std::array<ad::NodeId, 2> parts{mean_of(tape, id_sq),
                                        mean_of(tape, ood_sq)};
  const std::array<double, 2> coeffs{1.0, 1.0};
  return tape.lincomb(parts, coeffs);
}

TotalParts total_node(ad::Tape& tape, const BatchNodes& batch,
                      const LossWeights& weights) {
  weights.validate();
  const bool needs_ood = weights.variant != Variant::PSupCon;
  const bool has_encoder_ood_term = weights.variant == Variant::OPSupConR ||
                                    weights.variant == Variant::OPSupConM;
  if (needs_ood && batch.z_ood.empty()) {
    throw MissingOodError("total loss: variant requires an OOD batch");
  }
  if (has_encoder_ood_term && batch.f_ood.empty()) {
    throw MissingOodError("total loss: variant requires OOD encoder features");
  }

  TotalParts parts;
  parts.supcon = supcon_node(tape, batch.z_id, batch.labels, weights.tau);

  std::vector<ad::NodeId> terms{parts.supcon};
  std::vector<double> coeffs{1.0};

  if (needs_ood && weights.gamma > 0.0) {
    parts.ood_head = ood_head_node(tape, batch.z_ood, batch.z_id, weights.tau);
    terms.push_back(parts.ood_head);
    coeffs.push_back(weights.gamma);
  }
  if (weights.alpha > 0.0) {
    parts.tightness = tightness_node(tape, batch.f_id, batch.labels,
                                     batch.protos, batch.proto_class_ids);
    terms.push_back(parts.tightness);
    coeffs.push_back(weights.alpha);
    if (has_encoder_ood_term) {
      parts.ood_encoder =
          ood_encoder_node(tape, batch.f_ood, batch.protos, weights.tau);
      terms.push_back(parts.ood_encoder);
      coeffs.push_back(weights.alpha);
    }
  }
  parts.total = terms.size() == 1 ? parts.supcon : tape.lincomb(terms, coeffs);
  return parts;
}

// ---------------------------------------------------------------------------
// Plain wrappers
// ---------------------------------------------------------------------------

namespace {

std::vector<ad::NodeId> constant_nodes(ad::Tape& tape,
                                       std::span<const vec::Embedding> xs) {
  std::vector<ad::NodeId> out;
  out.reserve(xs.size());
  for (const auto& x : xs) out.push_back(tape.constant(x.values));
  return out;
}

std::vector<ad::NodeId> proto_nodes(ad::Tape& tape,
                                    const proto::PrototypeSet& protos) {
  std::vector<ad::NodeId> out;
  out.reserve(protos.size());
  for (std::size_t k = 0; k < protos.size(); ++k) {
    out.push_back(tape.constant(protos.vectors.row(k)));
  }
  return out;
}

}  // namespace

double supcon_loss(std::span<const vec::Embedding> z,
                   std::span<const int> labels, double tau) {
  ad::Tape tape;
  auto zn = constant_nodes(tape, z);
  return tape.scalar_value(supcon_node(tape, zn, labels, tau));
}

std::pair<double, double> supcon_loss_decomposed(
    std::span<const vec::Embedding> z, std::span<const int> labels,
    double tau) {
  ad::Tape tape;
  auto zn = constant_nodes(tape, z);
  SupconParts parts = supcon_decomposed_node(tape, zn, labels, tau);
  return {tape.scalar_value(parts.tightness), tape.scalar_value(parts.contrast)};
}

double tightness_loss(std::span<const vec::Embedding> f,
                      std::span<const int> labels,
                      const proto::PrototypeSet& protos) {
  ad::Tape tape;
  auto fn = constant_nodes(tape, f);
  auto pn = proto_nodes(tape, protos);
  return tape.scalar_value(
      tightness_node(tape, fn, labels, pn, protos.class_ids));
}

double ood_head_contrast(std::span<const vec::Embedding> z_ood,
                         std::span<const vec::Embedding> z_id, double tau) {
  ad::Tape tape;
  auto zo = constant_nodes(tape, z_ood);
  auto zi = constant_nodes(tape, z_id);
  return tape.scalar_value(ood_head_node(tape, zo, zi, tau));
}

double ood_encoder_contrast(std::span<const vec::Embedding> f_ood,
                            const proto::PrototypeSet& protos, double tau) {
  ad::Tape tape;
  auto fo = constant_nodes(tape, f_ood);
  auto pn = proto_nodes(tape, protos);
  return tape.scalar_value(ood_encoder_node(tape, fo, pn, tau));
}

double total_loss(std::span<const vec::Embedding> z_id,
                  std::span<const int> labels,
                  std::span<const vec::Embedding> f_id,
                  std::span<const vec::Embedding> f_ood,
                  std::span<const vec::Embedding> z_ood,
                  const proto::PrototypeSet& protos,
                  const LossWeights& weights) {
  ad::Tape tape;
  auto zi = constant_nodes(tape, z_id);
  auto fi = constant_nodes(tape, f_id);
  auto fo = constant_nodes(tape, f_ood);
  auto zo = constant_nodes(tape, z_ood);
  auto pn = proto_nodes(tape, protos);
  BatchNodes batch{zi, labels, fi, zo, fo, pn, protos.class_ids};
  return tape.scalar_value(total_node(tape, batch, weights).total);
}

double ce_loss(std::span<const vec::Vector> logits,
               std::span<const int> labels) {
  ad::Tape tape;
  std::vector<ad::NodeId> nodes;
  nodes.reserve(logits.size());
  for (const auto& l : logits) nodes.push_back(tape.constant(l));
  return tape.scalar_value(ce_node(tape, nodes, labels));
}

double energy_score_sum(std::span<const double> logits, double t) {
  if (!(t > 0.0)) throw ConfigError("energy: temperature must be > 0");
  vec::Vector scaled(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) scaled[i] = logits[i] / t;
  return -t * vec::log_sum_exp(scaled);
}

double energy_margin_loss(std::span<const vec::Vector> id_logits,
                          std::span<const vec::Vector> ood_logits,
                          const EnergyBaselineConfig& cfg) {
  ad::Tape tape;
  std::vector<ad::NodeId> idn, oodn;
  idn.reserve(id_logits.size());
  oodn.reserve(ood_logits.size());
  for (const auto& l : id_logits) idn.push_back(tape.constant(l));
  for (const auto& l : ood_logits) oodn.push_back(tape.constant(l));
  return tape.scalar_value(energy_margin_node(tape, idn, oodn, cfg));
}

}  // namespace oodcl::loss
