#include "core/autodiff.hpp"

#include <algorithm>
#include <cmath>

#include "core/vec_ops.hpp"

namespace oodcl::ad {

NodeId Tape::push(Op op, std::size_t len) {
  Node n;
  n.op = op;
  n.off = static_cast<std::uint32_t>(values_.size());
  n.len = static_cast<std::uint32_t>(len);
  values_.resize(values_.size() + len, 0.0);
  nodes_.push_back(n);
  return NodeId{static_cast<std::uint32_t>(nodes_.size() - 1)};
}

NodeId Tape::constant(std::span<const double> value) {
  NodeId id = push(Op::kConstant, value.size());
  std::copy(value.begin(), value.end(), slot(nodes_.back()).begin());
  return id;
}

NodeId Tape::constant_scalar(double value) {
  return constant(std::span<const double>(&value, 1));
}

NodeId Tape::param(std::span<const double> value) {
  NodeId id = push(Op::kParam, value.size());
  std::copy(value.begin(), value.end(), slot(nodes_.back()).begin());
  return id;
}

NodeId Tape::affine(NodeId w, NodeId b, NodeId x, std::size_t rows,
                    std::size_t cols) {
  const Node& nw = nodes_[w.v];
  const Node& nb = nodes_[b.v];
  const Node& nx = nodes_[x.v];
  if (nw.len != rows * cols || nb.len != rows || nx.len != cols) {
    throw DimensionMismatchError("affine: inconsistent shapes");
  }
  NodeId id = push(Op::kAffine, rows);
  Node& n = nodes_.back();
  n.a = w.v;
  n.b = b.v;
  n.c = x.v;
  auto out = slot(n);
  auto wv = slot(nodes_[w.v]);
  auto bv = slot(nodes_[b.v]);
  auto xv = slot(nodes_[x.v]);
  for (std::size_t r = 0; r < rows; ++r) {
    double s = bv[r];
    const double* wr = wv.data() + r * cols;
    for (std::size_t c = 0; c < cols; ++c) s += wr[c] * xv[c];
    out[r] = s;
  }
  return id;
}

NodeId Tape::matvec(NodeId m, NodeId x, std::size_t rows, std::size_t cols) {
  const Node& nm = nodes_[m.v];
  const Node& nx = nodes_[x.v];
  if (nm.len != rows * cols || nx.len != cols) {
    throw DimensionMismatchError("matvec: inconsistent shapes");
  }
  NodeId id = push(Op::kMatVec, rows);
  Node& n = nodes_.back();
  n.a = m.v;
  n.b = x.v;
  auto out = slot(n);
  auto mv = slot(nodes_[m.v]);
  auto xv = slot(nodes_[x.v]);
  for (std::size_t r = 0; r < rows; ++r) {
    double s = 0.0;
    const double* mr = mv.data() + r * cols;
    for (std::size_t c = 0; c < cols; ++c) s += mr[c] * xv[c];
    out[r] = s;
  }
  return id;
}

NodeId Tape::relu(NodeId x) {
  const std::size_t len = nodes_[x.v].len;
  NodeId id = push(Op::kRelu, len);
  Node& n = nodes_.back();
  n.a = x.v;
  auto out = slot(n);
  auto xv = slot(nodes_[x.v]);
  for (std::size_t i = 0; i < len; ++i) out[i] = xv[i] > 0.0 ? xv[i] : 0.0;
  return id;
}

NodeId Tape::normalize(NodeId x) {
  const std::size_t len = nodes_[x.v].len;
  auto xv = slot(nodes_[x.v]);
  const double r = vec::norm(xv);
  if (!(r >= vec::kZeroNormThreshold)) {
    throw ZeroVectorError("normalize: vector norm below 1e-12");
  }
  NodeId id = push(Op::kNormalize, len);
  Node& n = nodes_.back();
  n.a = x.v;
  n.aux = r;
  auto out = slot(n);
  xv = slot(nodes_[x.v]);  // re-fetch: push may have reallocated the arena
  for (std::size_t i = 0; i < len; ++i) out[i] = xv[i] / r;
  return id;
}

NodeId Tape::dot(NodeId u, NodeId v) {
  const Node& nu = nodes_[u.v];
  const Node& nv = nodes_[v.v];
  if (nu.len != nv.len) throw DimensionMismatchError("dot: dimensions differ");
  NodeId id = push(Op::kDot, 1);
  Node& n = nodes_.back();
  n.a = u.v;
  n.b = v.v;
  auto uv = slot(nodes_[u.v]);
  auto vv = slot(nodes_[v.v]);
  double s = 0.0;
  for (std::size_t i = 0; i < uv.size(); ++i) s += uv[i] * vv[i];
  slot(n)[0] = s;
  return id;
}

NodeId Tape::add(NodeId a, NodeId b) {
  const std::size_t len = nodes_[a.v].len;
  if (len != nodes_[b.v].len) throw DimensionMismatchError("add: sizes differ");
  NodeId id = push(Op::kAdd, len);
  Node& n = nodes_.back();
  n.a = a.v;
  n.b = b.v;
  auto out = slot(n);
  auto av = slot(nodes_[a.v]);
  auto bv = slot(nodes_[b.v]);
  for (std::size_t i = 0; i < len; ++i) out[i] = av[i] + bv[i];
  return id;
}

NodeId Tape::sub(NodeId a, NodeId b) {
  const std::size_t len = nodes_[a.v].len;
  if (len != nodes_[b.v].len) throw DimensionMismatchError("sub: sizes differ");
  NodeId id = push(Op::kSub, len);
  Node& n = nodes_.back();
  n.a = a.v;
  n.b = b.v;
  auto out = slot(n);
  auto av = slot(nodes_[a.v]);
  auto bv = slot(nodes_[b.v]);
  for (std::size_t i = 0; i < len; ++i) out[i] = av[i] - bv[i];
  return id;
}

NodeId Tape::mul(NodeId a, NodeId b) {
  const std::size_t len = nodes_[a.v].len;
  if (len != nodes_[b.v].len) throw DimensionMismatchError("mul: sizes differ");
  NodeId id = push(Op::kMul, len);
  Node& n = nodes_.back();
  n.a = a.v;
  n.b = b.v;
  auto out = slot(n);
  auto av = slot(nodes_[a.v]);
  auto bv = slot(nodes_[b.v]);
  for (std::size_t i = 0; i < len; ++i) out[i] = av[i] * bv[i];
  return id;
}

NodeId Tape::scale(NodeId x, double c) {
  const std::size_t len = nodes_[x.v].len;
  NodeId id = push(Op::kScale, len);
  Node& n = nodes_.back();
  n.a = x.v;
  n.aux = c;
  auto out = slot(n);
  auto xv = slot(nodes_[x.v]);
  for (std::size_t i = 0; i < len; ++i) out[i] = c * xv[i];
  return id;
}

NodeId Tape::add_scalar(NodeId x, double c) {
  const std::size_t len = nodes_[x.v].len;
  NodeId id = push(Op::kAddScalar, len);
  Node& n = nodes_.back();
  n.a = x.v;
  n.aux = c;
  auto out = slot(n);
  auto xv = slot(nodes_[x.v]);
  for (std::size_t i = 0; i < len; ++i) out[i] = xv[i] + c;
  return id;
}

NodeId Tape::stack(std::span<const NodeId> scalars) {
  if (scalars.empty()) throw EmptyInputError("stack: no inputs");
  const std::uint32_t list_off = static_cast<std::uint32_t>(list_pool_.size());
  for (NodeId s : scalars) {
    if (nodes_[s.v].len != 1) {
      throw DimensionMismatchError("stack: inputs must be scalars");
    }
    list_pool_.push_back(s.v);
  }
  NodeId id = push(Op::kStack, scalars.size());
  Node& n = nodes_.back();
  n.a = list_off;
  n.b = static_cast<std::uint32_t>(scalars.size());
  auto out = slot(n);
  for (std::size_t i = 0; i < scalars.size(); ++i) {
    out[i] = values_[nodes_[list_pool_[list_off + i]].off];
  }
  return id;
}

NodeId Tape::log_sum_exp(NodeId x) {
  const Node& nx = nodes_[x.v];
  if (nx.len == 0) throw EmptyInputError("log_sum_exp: empty input");
  NodeId id = push(Op::kLogSumExp, 1);
  Node& n = nodes_.back();
  n.a = x.v;
  auto xv = slot(nodes_[x.v]);
  const double m = *std::max_element(xv.begin(), xv.end());
  double s = 0.0;
  for (double v : xv) s += std::exp(v - m);
  slot(n)[0] = m + std::log(s);
  return id;
}

NodeId Tape::pick(NodeId x, std::size_t index) {
  const Node& nx = nodes_[x.v];
  if (index >= nx.len) throw DimensionMismatchError("pick: index out of range");
  NodeId id = push(Op::kPick, 1);
  Node& n = nodes_.back();
  n.a = x.v;
  n.b = static_cast<std::uint32_t>(index);
  slot(n)[0] = values_[nodes_[x.v].off + index];
  return id;
}

NodeId Tape::lincomb(std::span<const NodeId> scalars,
                     std::span<const double> coeffs) {
  if (scalars.empty()) throw EmptyInputError("lincomb: no inputs");
  if (scalars.size() != coeffs.size()) {
    throw DimensionMismatchError("lincomb: inputs vs coefficients");
  }
  const std::uint32_t list_off = static_cast<std::uint32_t>(list_pool_.size());
  const std::uint32_t coeff_off = static_cast<std::uint32_t>(coeff_pool_.size());
  for (NodeId s : scalars) {
    if (nodes_[s.v].len != 1) {
      throw DimensionMismatchError("lincomb: inputs must be scalars");
    }
    list_pool_.push_back(s.v);
  }
  coeff_pool_.insert(coeff_pool_.end(), coeffs.begin(), coeffs.end());
  NodeId id = push(Op::kLinComb, 1);
  Node& n = nodes_.back();
  n.a = list_off;
  n.b = static_cast<std::uint32_t>(scalars.size());
  n.c = coeff_off;
  double s = 0.0;
  for (std::size_t i = 0; i < scalars.size(); ++i) {
    s += coeff_pool_[coeff_off + i] * values_[nodes_[list_pool_[list_off + i]].off];
  }
  slot(n)[0] = s;
  return id;
}

std::span<const double> Tape::value(NodeId id) const {
  return slot(nodes_[id.v]);
}

double Tape::scalar_value(NodeId id) const {
  const Node& n = nodes_[id.v];
  return values_[n.off];
}

std::span<const double> Tape::grad(NodeId id) const {
  const Node& n = nodes_[id.v];
  return {grads_.data() + n.off, n.len};
}

void Tape::backward(NodeId root) {
  const Node& rn = nodes_[root.v];
  if (rn.len != 1) throw DimensionMismatchError("backward: root must be scalar");
  if (!std::isfinite(values_[rn.off])) {
    throw NonFiniteLossError("backward: loss value is not finite");
  }
  grads_.assign(values_.size(), 0.0);
  grads_[rn.off] = 1.0;

  for (std::size_t idx = root.v + 1; idx-- > 0;) {
    const Node& n = nodes_[idx];
    const double* g = grads_.data() + n.off;
    switch (n.op) {
      case Op::kConstant:
      case Op::kParam:
        break;
      case Op::kAffine: {
        const Node& nw = nodes_[n.a];
        const Node& nb = nodes_[n.b];
        const Node& nx = nodes_[n.c];
        const std::size_t rows = n.len, cols = nx.len;
        double* gw = grads_.data() + nw.off;
        double* gb = grads_.data() + nb.off;
        double* gx = grads_.data() + nx.off;
        const double* wv = values_.data() + nw.off;
        const double* xv = values_.data() + nx.off;
        for (std::size_t r = 0; r < rows; ++r) {
          const double gr = g[r];
          if (gr == 0.0) continue;
          gb[r] += gr;
          double* gwr = gw + r * cols;
          const double* wr = wv + r * cols;
          for (std::size_t c = 0; c < cols; ++c) {
            gwr[c] += gr * xv[c];
            gx[c] += gr * wr[c];
          }
        }
        break;
      }
      case Op::kMatVec: {
        const Node& nm = nodes_[n.a];
        const Node& nx = nodes_[n.b];
        const std::size_t rows = n.len, cols = nx.len;
        double* gm = grads_.data() + nm.off;
        double* gx = grads_.data() + nx.off;
        const double* mv = values_.data() + nm.off;
        const double* xv = values_.data() + nx.off;
        for (std::size_t r = 0; r < rows; ++r) {
          const double gr = g[r];
          if (gr == 0.0) continue;
          double* gmr = gm + r * cols;
          const double* mr = mv + r * cols;
          for (std::size_t c = 0; c < cols; ++c) {
            gmr[c] += gr * xv[c];
            gx[c] += gr * mr[c];
          }
        }
        break;
      }
      case Op::kRelu: {
        const Node& nx = nodes_[n.a];
        double* gx = grads_.data() + nx.off;
        const double* xv = values_.data() + nx.off;
        for (std::size_t i = 0; i < n.len; ++i) {
          if (xv[i] > 0.0) gx[i] += g[i];
        }
        break;
      }
      case Op::kNormalize: {
        // y = x / r with r = ||x||;  dx = (g - y (g.y)) / r
        const Node& nx = nodes_[n.a];
        double* gx = grads_.data() + nx.off;
        const double* yv = values_.data() + n.off;
        const double r = n.aux;
        double gy = 0.0;
        for (std::size_t i = 0; i < n.len; ++i) gy += g[i] * yv[i];
        for (std::size_t i = 0; i < n.len; ++i) {
          gx[i] += (g[i] - yv[i] * gy) / r;
        }
        break;
      }
      case Op::kDot: {
        const Node& nu = nodes_[n.a];
        const Node& nv = nodes_[n.b];
        const double gs = g[0];
        if (gs == 0.0) break;
        double* gu = grads_.data() + nu.off;
        double* gv = grads_.data() + nv.off;
        const double* uv = values_.data() + nu.off;
        const double* vv = values_.data() + nv.off;
        for (std::size_t i = 0; i < nu.len; ++i) {
          gu[i] += gs * vv[i];
          gv[i] += gs * uv[i];
        }
        break;
      }
      case Op::kAdd: {
        double* ga = grads_.data() + nodes_[n.a].off;
        double* gb = grads_.data() + nodes_[n.b].off;
        for (std::size_t i = 0; i < n.len; ++i) {
          ga[i] += g[i];
          gb[i] += g[i];
        }
        break;
      }
      case Op::kSub: {
        double* ga = grads_.data() + nodes_[n.a].off;
        double* gb = grads_.data() + nodes_[n.b].off;
        for (std::size_t i = 0; i < n.len; ++i) {
          ga[i] += g[i];
          gb[i] -= g[i];
        }
        break;
      }
      case Op::kMul: {
        double* ga = grads_.data() + nodes_[n.a].off;
        double* gb = grads_.data() + nodes_[n.b].off;
        const double* av = values_.data() + nodes_[n.a].off;
        const double* bv = values_.data() + nodes_[n.b].off;
        for (std::size_t i = 0; i < n.len; ++i) {
          ga[i] += g[i] * bv[i];
          gb[i] += g[i] * av[i];
        }
        break;
      }
      case Op::kScale: {
        double* gx = grads_.data() + nodes_[n.a].off;
        for (std::size_t i = 0; i < n.len; ++i) gx[i] += n.aux * g[i];
        break;
      }
      case Op::kAddScalar: {
        double* gx = grads_.data() + nodes_[n.a].off;
        for (std::size_t i = 0; i < n.len; ++i) gx[i] += g[i];
        break;
      }
      case Op::kStack: {
        for (std::size_t i = 0; i < n.b; ++i) {
          const Node& in = nodes_[list_pool_[n.a + i]];
          grads_[in.off] += g[i];
        }
        break;
      }
      case Op::kLogSumExp: {
        // d lse / d x_i = exp(x_i - lse)
        const Node& nx = nodes_[n.a];
        const double gs = g[0];
        if (gs == 0.0) break;
        const double y = values_[n.off];
        double* gx = grads_.data() + nx.off;
        const double* xv = values_.data() + nx.off;
        for (std::size_t i = 0; i < nx.len; ++i) {
          gx[i] += gs * std::exp(xv[i] - y);
        }
        break;
      }
      case Op::kPick: {
        grads_[nodes_[n.a].off + n.b] += g[0];
        break;
      }
      case Op::kLinComb: {
        const double gs = g[0];
        if (gs == 0.0) break;
        for (std::size_t i = 0; i < n.b; ++i) {
          const Node& in = nodes_[list_pool_[n.a + i]];
          grads_[in.off] += gs * coeff_pool_[n.c + i];
        }
        break;
      }
    }
  }
}

void Tape::clear() {
  nodes_.clear();
  values_.clear();
  grads_.clear();
  list_pool_.clear();
  coeff_pool_.clear();
}

void Tape::reserve(std::size_t nodes, std::size_t doubles) {
  nodes_.reserve(nodes);
  values_.reserve(doubles);
  list_pool_.reserve(nodes);
}

}  // namespace oodcl::ad
