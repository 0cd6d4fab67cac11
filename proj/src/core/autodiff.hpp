#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "core/errors.hpp"

namespace oodcl::ad {

struct NodeId {
  std::uint32_t v = UINT32_MAX;
  bool valid() const { return v != UINT32_MAX; }
};

// Reverse-mode tape over vector-valued nodes. Values live in one flat arena
// (gradients share the same offsets), so building a step's graph allocates
// close to nothing after the first step. Nodes are created in topological
// order by construction; backward() walks them in reverse.
//
// Scalars are represented as length-1 nodes.
class Tape {
 public:
  // Leaf with no gradient of interest.
  NodeId constant(std::span<const double> value);
  NodeId constant_scalar(double value);
  // Leaf that accumulates gradient (weights, biases, prototypes).
  NodeId param(std::span<const double> value);

  // y = W x + b. `w` holds rows*cols row-major, `b` has length rows.
  NodeId affine(NodeId w, NodeId b, NodeId x, std::size_t rows,
                std::size_t cols);
  // y = M x (no bias).
  NodeId matvec(NodeId m, NodeId x, std::size_t rows, std::size_t cols);
  NodeId relu(NodeId x);
  // x / ||x||; throws ZeroVectorError below the library-wide norm threshold.
  NodeId normalize(NodeId x);
  NodeId dot(NodeId u, NodeId v);  // scalar
  NodeId add(NodeId a, NodeId b);  // elementwise, equal sizes
  NodeId sub(NodeId a, NodeId b);
  NodeId mul(NodeId a, NodeId b);  // elementwise (squares, hinges)
  NodeId scale(NodeId x, double c);
  NodeId add_scalar(NodeId x, double c);
  // Vector assembled from scalar nodes.
  NodeId stack(std::span<const NodeId> scalars);
  // Scalar log(sum exp(x_i)) over the components of one vector node.
  NodeId log_sum_exp(NodeId x);
  NodeId pick(NodeId x, std::size_t index);  // scalar x[index]
  // Scalar sum_i coeffs[i] * scalars[i], accumulated left to right.
  NodeId lincomb(std::span<const NodeId> scalars,
                 std::span<const double> coeffs);

  std::span<const double> value(NodeId id) const;
  double scalar_value(NodeId id) const;

  // Seeds d(root)/d(root) = 1 and accumulates into every node's grad slot.
  // Root must be scalar; throws NonFiniteLossError when its value is not
  // finite. May be called once per tape build.
  void backward(NodeId root);
  std::span<const double> grad(NodeId id) const;

  std::size_t node_count() const { return nodes_.size(); }
  void clear();
  void reserve(std::size_t nodes, std::size_t doubles);

 private:
  enum class Op : std::uint8_t {
    kConstant,
    kParam,
    kAffine,
    kMatVec,
    kRelu,
    kNormalize,
    kDot,
    kAdd,
    kSub,
    kMul,
    kScale,
    kAddScalar,
    kStack,
    kLogSumExp,
    kPick,
    kLinComb,
  };

  struct Node {
    Op op;
    std::uint32_t a = UINT32_MAX;  // first input (or list offset for variadic)
    std::uint32_t b = UINT32_MAX;  // second input (or list length)
    std::uint32_t c = UINT32_MAX;  // third input (affine x)
    std::uint32_t off = 0;         // value/grad offset in the arena
    std::uint32_t len = 0;
    double aux = 0.0;  // scale factor, added constant, cached norm, ...
  };

  NodeId push(Op op, std::size_t len);
  std::span<double> slot(const Node& n) { return {values_.data() + n.off, n.len}; }
  std::span<const double> slot(const Node& n) const {
    return {values_.data() + n.off, n.len};
  }
  std::span<double> gslot(const Node& n) { return {grads_.data() + n.off, n.len}; }

  std::vector<Node> nodes_;
  std::vector<double> values_;
  std::vector<double> grads_;
  std::vector<std::uint32_t> list_pool_;  // inputs of variadic nodes
  std::vector<double> coeff_pool_;        // coefficients of lincomb nodes
};

}  // namespace oodcl::ad
