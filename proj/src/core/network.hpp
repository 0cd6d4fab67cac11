#pragma once

#include <cstdint>
#include <functional>
#include <span>

#include "core/autodiff.hpp"
#include "core/vec_ops.hpp"

namespace oodcl::net {

struct NetworkDims {
  std::size_t input_dim = 0;
  std::size_t hidden_dim = 0;
  std::size_t feat_dim = 0;
  std::size_t head_dim = 0;

  void validate() const;
  bool operator==(const NetworkDims&) const = default;
};

// Encoder E: input -> hidden (ReLU) -> feat, normalized.
// Head H:    feat -> hidden (ReLU) -> head, normalized.
struct NetworkParams {
  NetworkDims dims;
  vec::Matrix enc_w1;
  vec::Vector enc_b1;
  vec::Matrix enc_w2;
  vec::Vector enc_b2;
  vec::Matrix head_w1;
  vec::Vector head_b1;
  vec::Matrix head_w2;
  vec::Vector head_b2;
};

// Gradients share the parameter layout.
using NetworkGrads = NetworkParams;

// Weights ~ Normal(0, 1/fan_in), biases zero; bit-identical for equal
// (dims, seed).
NetworkParams init_params(const NetworkDims& dims, std::uint64_t seed);

// f = normalize(W2 relu(W1 x + b1) + b2). Throws DimensionMismatchError on a
// wrong input size and ZeroVectorError if the pre-normalization output
// collapses.
vec::Embedding forward_encoder(const NetworkParams& params,
                               std::span<const double> x);
vec::Embedding forward_head(const NetworkParams& params,
                            const vec::Embedding& f);

// Tape-side forward passes used by training. The plain and tape paths apply
// identical operation order, so their values agree to rounding.
struct ParamNodes {
  ad::NodeId enc_w1, enc_b1, enc_w2, enc_b2;
  ad::NodeId head_w1, head_b1, head_w2, head_b2;
};

ParamNodes register_params(ad::Tape& tape, const NetworkParams& params);
ad::NodeId encoder_node(ad::Tape& tape, const ParamNodes& nodes,
                        const NetworkDims& dims, std::span<const double> x);
ad::NodeId head_node(ad::Tape& tape, const ParamNodes& nodes,
                     const NetworkDims& dims, ad::NodeId f);

// Builds a scalar loss from freshly registered parameter nodes.
using LossClosure =
    std::function<ad::NodeId(ad::Tape& tape, const ParamNodes& nodes)>;

// d(loss)/d(params) by reverse accumulation through the whole composition,
// both normalizations included. Throws NonFiniteLossError when the forward
// value is not finite.
NetworkGrads gradient(const NetworkParams& params, const LossClosure& loss);

// Copies accumulated tape gradients back into parameter layout.
NetworkGrads collect_grads(const ad::Tape& tape, const ParamNodes& nodes,
                           const NetworkDims& dims);

// All tensors in checkpoint order: enc_w1, enc_b1, enc_w2, enc_b2, head_w1,
// head_b1, head_w2, head_b2.
std::vector<std::span<double>> tensor_views(NetworkParams& p);
std::vector<std::span<const double>> tensor_views(const NetworkParams& p);

}  // namespace oodcl::net
