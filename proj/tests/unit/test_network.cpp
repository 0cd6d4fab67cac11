#include <cmath>
#include <random>

#include "core/network.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace oodcl;

namespace {

const net::NetworkDims kSmallDims{2, 4, 3, 2};

}  // namespace

TEST_CASE("init_params is deterministic and zero-biased") {
  const auto a = net::init_params(kSmallDims, 0);
  const auto b = net::init_params(kSmallDims, 0);
  CHECK(a.enc_w1.data == b.enc_w1.data);
  CHECK(a.head_w2.data == b.head_w2.data);
  for (double v : a.enc_b1) CHECK(v == 0.0);
  for (double v : a.enc_b2) CHECK(v == 0.0);
  for (double v : a.head_b1) CHECK(v == 0.0);
  for (double v : a.head_b2) CHECK(v == 0.0);

  const auto c = net::init_params(kSmallDims, 1);
  CHECK(a.enc_w1.data != c.enc_w1.data);
}

TEST_CASE("forward passes produce unit embeddings") {
  const auto params = net::init_params(net::NetworkDims{8, 16, 8, 4}, 42);
  std::mt19937_64 eng(5);
  std::normal_distribution<double> dist(0.0, 1.0);
  for (int it = 0; it < 25; ++it) {
    vec::Vector x(8);
    for (double& v : x) v = dist(eng);
    const auto f = net::forward_encoder(params, x);
    CHECK(std::abs(vec::norm(f.values) - 1.0) < 1e-9);
    const auto z = net::forward_head(params, f);
    CHECK(std::abs(vec::norm(z.values) - 1.0) < 1e-9);
  }
}

TEST_CASE("forward rejects wrong dimensions") {
  const auto params = net::init_params(kSmallDims, 0);
  CHECK_THROWS_AS(net::forward_encoder(params, vec::Vector{1.0, 2.0, 3.0}),
                  DimensionMismatchError);
  CHECK_THROWS_AS(net::forward_head(params, vec::Embedding{{1.0, 0.0}}),
                  DimensionMismatchError);
}

TEST_CASE("hand-traced identity-like encoder") {
  // 2 -> 2 -> 2 with identity weights: f = normalize(relu(x)).
  net::NetworkParams p;
  p.dims = {2, 2, 2, 2};
  p.enc_w1 = vec::Matrix(2, 2);
  p.enc_w1.at(0, 0) = 1.0;
  p.enc_w1.at(1, 1) = 1.0;
  p.enc_b1 = {0.0, 0.0};
  p.enc_w2 = p.enc_w1;
  p.enc_b2 = {0.0, 0.0};
  p.head_w1 = p.enc_w1;
  p.head_b1 = {0.0, 0.0};
  p.head_w2 = p.enc_w1;
  p.head_b2 = {0.0, 0.0};

  const auto f = net::forward_encoder(p, vec::Vector{1.0, 0.0});
  CHECK(f.values[0] == doctest::Approx(1.0));
  CHECK(f.values[1] == doctest::Approx(0.0));

  const auto g = net::forward_encoder(p, vec::Vector{3.0, 4.0});
  CHECK(g.values[0] == doctest::Approx(0.6));
  CHECK(g.values[1] == doctest::Approx(0.8));

  // All-negative input dies at the ReLU and collapses to zero.
  CHECK_THROWS_AS(net::forward_encoder(p, vec::Vector{-1.0, -2.0}),
                  ZeroVectorError);
}

TEST_CASE("tape forward agrees with the plain forward") {
  const net::NetworkDims dims{8, 16, 8, 4};
  const auto params = net::init_params(dims, 9);
  std::mt19937_64 eng(10);
  std::normal_distribution<double> dist(0.0, 1.0);
  for (int it = 0; it < 20; ++it) {
    vec::Vector x(8);
    for (double& v : x) v = dist(eng);

    ad::Tape tape;
    const auto nodes = net::register_params(tape, params);
    const auto fn = net::encoder_node(tape, nodes, dims, x);
    const auto zn = net::head_node(tape, nodes, dims, fn);

    const auto f = net::forward_encoder(params, x);
    const auto z = net::forward_head(params, f);
    for (std::size_t i = 0; i < f.values.size(); ++i) {
      CHECK(std::abs(tape.value(fn)[i] - f.values[i]) < 1e-14);
    }
    for (std::size_t i = 0; i < z.values.size(); ++i) {
      CHECK(std::abs(tape.value(zn)[i] - z.values[i]) < 1e-14);
    }
  }
}

TEST_CASE("gradient of a constant loss is zero") {
  const auto params = net::init_params(kSmallDims, 3);
  const auto grads = net::gradient(
      params, [](ad::Tape& t, const net::ParamNodes&) {
        return t.constant_scalar(4.2);
      });
  for (auto view : net::tensor_views(grads)) {
    for (double g : view) CHECK(g == 0.0);
  }
}

TEST_CASE("gradient through a linear encoder matches the projection formula") {
  // Linear 2->2 encoder (identity hidden path), loss = f . u. With
  // w2 = I and relu inactive on positive inputs, f = x+ / ||x+||, and
  // d(loss)/d(enc_w2) comes from the normalize projection alone.
  net::NetworkParams p;
  p.dims = {2, 2, 2, 2};
  p.enc_w1 = vec::Matrix(2, 2);
  p.enc_w1.at(0, 0) = 1.0;
  p.enc_w1.at(1, 1) = 1.0;
  p.enc_b1 = {0.0, 0.0};
  p.enc_w2 = p.enc_w1;
  p.enc_b2 = {0.0, 0.0};
  p.head_w1 = p.enc_w1;
  p.head_b1 = {0.0, 0.0};
  p.head_w2 = p.enc_w1;
  p.head_b2 = {0.0, 0.0};

  const vec::Vector x{0.6, 0.8};  // already unit, relu inactive
  const vec::Vector u{1.0, 0.0};

  const auto grads =
      net::gradient(p, [&](ad::Tape& t, const net::ParamNodes& nodes) {
        const auto f = net::encoder_node(t, nodes, p.dims, x);
        return t.dot(f, t.constant(u));
      });

  // y = W2 h with W2 = I, h = x, ||x|| = 1: dL/dW2 = ((I - xx^T) u) x^T.
  const double px0 = u[0] - x[0] * (x[0] * u[0] + x[1] * u[1]);
  const double px1 = u[1] - x[1] * (x[0] * u[0] + x[1] * u[1]);
  CHECK(grads.enc_w2.at(0, 0) == doctest::Approx(px0 * x[0]).epsilon(1e-10));
  CHECK(grads.enc_w2.at(0, 1) == doctest::Approx(px0 * x[1]).epsilon(1e-10));
  CHECK(grads.enc_w2.at(1, 0) == doctest::Approx(px1 * x[0]).epsilon(1e-10));
  CHECK(grads.enc_w2.at(1, 1) == doctest::Approx(px1 * x[1]).epsilon(1e-10));
}

TEST_CASE("network gradient matches finite differences on a composite loss") {
  const net::NetworkDims dims{8, 16, 8, 4};
  std::mt19937_64 eng(77);
  std::normal_distribution<double> dist(0.0, 1.0);

  for (int it = 0; it < 5; ++it) {
    auto params = net::init_params(dims, 100 + it);
    std::vector<vec::Vector> xs(6, vec::Vector(8));
    for (auto& x : xs) {
      for (double& v : x) v = dist(eng);
    }
    vec::Vector u(4);
    for (double& v : u) v = dist(eng);
    const auto target = vec::normalize(u);

    auto closure = [&](ad::Tape& t, const net::ParamNodes& nodes) {
      std::vector<ad::NodeId> terms;
      for (const auto& x : xs) {
        const auto f = net::encoder_node(t, nodes, dims, x);
        const auto z = net::head_node(t, nodes, dims, f);
        terms.push_back(t.dot(z, t.constant(target.values)));
      }
      std::vector<double> coeffs(terms.size(), 1.0 / double(terms.size()));
      return t.lincomb(terms, coeffs);
    };

    const auto analytic = net::gradient(params, closure);
    auto eval = [&]() {
      ad::Tape t;
      const auto nodes = net::register_params(t, params);
      return t.scalar_value(closure(t, nodes));
    };
    vec::Matrix no_protos;
    const double err = oracles::max_grad_error(params, no_protos, analytic,
                                               no_protos, eval);
    CHECK(err < 1e-4);
  }
}
