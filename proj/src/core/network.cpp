#include "core/network.hpp"

#include <cmath>
#include <random>

#include "core/rng.hpp"

namespace oodcl::net {

void NetworkDims::validate() const {
  if (input_dim < 1 || hidden_dim < 1 || feat_dim < 1 || head_dim < 1) {
    throw ConfigError("network dims must all be >= 1");
  }
}

namespace {

vec::Matrix random_matrix(std::size_t rows, std::size_t cols,
                          rng::Engine& eng) {
  vec::Matrix m(rows, cols);
  std::normal_distribution<double> dist(0.0, 1.0 / std::sqrt(double(cols)));
  for (double& w : m.data) w = dist(eng);
  return m;
}

vec::Vector affine_relu(const vec::Matrix& w, const vec::Vector& b,
                        std::span<const double> x, bool apply_relu) {
  vec::Vector out(w.rows);
  for (std::size_t r = 0; r < w.rows; ++r) {
    double s = b[r];
    auto row = w.row(r);
    for (std::size_t c = 0; c < w.cols; ++c) s += row[c] * x[c];
    out[r] = apply_relu && s < 0.0 ? 0.0 : s;
  }
  return out;
}

}  // namespace

NetworkParams init_params(const NetworkDims& dims, std::uint64_t seed) {
  dims.validate();
  auto eng = rng::make_engine(seed, rng::salt::kInitWeights);
  NetworkParams p;
  p.dims = dims;
  p.enc_w1 = random_matrix(dims.hidden_dim, dims.input_dim, eng);
  p.enc_b1.assign(dims.hidden_dim, 0.0);
  p.enc_w2 = random_matrix(dims.feat_dim, dims.hidden_dim, eng);
  p.enc_b2.assign(dims.feat_dim, 0.0);
  p.head_w1 = random_matrix(dims.hidden_dim, dims.feat_dim, eng);
  p.head_b1.assign(dims.hidden_dim, 0.0);
  p.head_w2 = random_matrix(dims.head_dim, dims.hidden_dim, eng);
  p.head_b2.assign(dims.head_dim, 0.0);
  return p;
}

vec::Embedding forward_encoder(const NetworkParams& params,
                               std::span<const double> x) {
  if (x.size() != params.dims.input_dim) {
    throw DimensionMismatchError("forward_encoder: input dim " +
                                 std::to_string(x.size()) + ", expected " +
                                 std::to_string(params.dims.input_dim));
  }
  vec::Vector h = affine_relu(params.enc_w1, params.enc_b1, x, true);
  vec::Vector f = affine_relu(params.enc_w2, params.enc_b2, h, false);
  return vec::normalize(f);
}

vec::Embedding forward_head(const NetworkParams& params,
                            const vec::Embedding& f) {
  if (f.dim() != params.dims.feat_dim) {
    throw DimensionMismatchError("forward_head: feature dim " +
                                 std::to_string(f.dim()) + ", expected " +
                                 std::to_string(params.dims.feat_dim));
  }
  vec::Vector h = affine_relu(params.head_w1, params.head_b1, f.span(), true);
  vec::Vector z = affine_relu(params.head_w2, params.head_b2, h, false);
  return vec::normalize(z);
}

ParamNodes register_params(ad::Tape& tape, const NetworkParams& p) {
  ParamNodes n;
  n.enc_w1 = tape.param(p.enc_w1.data);
  n.enc_b1 = tape.param(p.enc_b1);
  n.enc_w2 = tape.param(p.enc_w2.data);
  n.enc_b2 = tape.param(p.enc_b2);
  n.head_w1 = tape.param(p.head_w1.data);
  n.head_b1 = tape.param(p.head_b1);
  n.head_w2 = tape.param(p.head_w2.data);
  n.head_b2 = tape.param(p.head_b2);
  return n;
}

ad::NodeId encoder_node(ad::Tape& tape, const ParamNodes& nodes,
                        const NetworkDims& dims, std::span<const double> x) {
  if (x.size() != dims.input_dim) {
    throw DimensionMismatchError("encoder_node: wrong input dim");
  }
  ad::NodeId xin = tape.constant(x);
  ad::NodeId h = tape.relu(
      tape.affine(nodes.enc_w1, nodes.enc_b1, xin, dims.hidden_dim, dims.input_dim));
  ad::NodeId f =
      tape.affine(nodes.enc_w2, nodes.enc_b2, h, dims.feat_dim, dims.hidden_dim);
  return tape.normalize(f);
}

ad::NodeId head_node(ad::Tape& tape, const ParamNodes& nodes,
                     const NetworkDims& dims, ad::NodeId f) {
  ad::NodeId h = tape.relu(tape.affine(nodes.head_w1, nodes.head_b1, f,
                                       dims.hidden_dim, dims.feat_dim));
  ad::NodeId z = tape.affine(nodes.head_w2, nodes.head_b2, h, dims.head_dim,
                             dims.hidden_dim);
  return tape.normalize(z);
}

NetworkGrads collect_grads(const ad::Tape& tape, const ParamNodes& nodes,
                           const NetworkDims& dims) {
  NetworkGrads g;
  g.dims = dims;
  auto copy_matrix = [&](ad::NodeId id, std::size_t rows, std::size_t cols) {
    vec::Matrix m(rows, cols);
    auto gv = tape.grad(id);
    std::copy(gv.begin(), gv.end(), m.data.begin());
    return m;
  };
  auto copy_vector = [&](ad::NodeId id) {
    auto gv = tape.grad(id);
    return vec::Vector(gv.begin(), gv.end());
  };
  g.enc_w1 = copy_matrix(nodes.enc_w1, dims.hidden_dim, dims.input_dim);
  g.enc_b1 = copy_vector(nodes.enc_b1);
  g.enc_w2 = copy_matrix(nodes.enc_w2, dims.feat_dim, dims.hidden_dim);
  g.enc_b2 = copy_vector(nodes.enc_b2);
  g.head_w1 = copy_matrix(nodes.head_w1, dims.hidden_dim, dims.feat_dim);
  g.head_b1 = copy_vector(nodes.head_b1);
  g.head_w2 = copy_matrix(nodes.head_w2, dims.head_dim, dims.hidden_dim);
  g.head_b2 = copy_vector(nodes.head_b2);
  return g;
}

NetworkGrads gradient(const NetworkParams& params, const LossClosure& loss) {
  ad::Tape tape;
  ParamNodes nodes = register_params(tape, params);
  ad::NodeId root = loss(tape, nodes);
  tape.backward(root);
  return collect_grads(tape, nodes, params.dims);
}

std::vector<std::span<double>> tensor_views(NetworkParams& p) {
  return {p.enc_w1.data, p.enc_b1, p.enc_w2.data, p.enc_b2,
          p.head_w1.data, p.head_b1, p.head_w2.data, p.head_b2};
}

std::vector<std::span<const double>> tensor_views(const NetworkParams& p) {
  return {p.enc_w1.data, p.enc_b1, p.enc_w2.data, p.enc_b2,
          p.head_w1.data, p.head_b1, p.head_w2.data, p.head_b2};
}

}  // namespace oodcl::net
