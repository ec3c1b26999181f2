#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>

#include "ltc/optim.hpp"
#include "ltc/rng.hpp"

using namespace ltc;

namespace {

// Single scalar parameter wrapped as a 1x1 network.
NetworkParams scalar_net(double value) {
  NetworkParams net;
  net.role = Role::Energy;
  DenseLayer l;
  l.name = "w";
  l.weight = Tensor({1, 1}, {value});
  l.bias = Tensor::zeros({1});
  net.layers.push_back(l);
  return net;
}

std::vector<Tensor> scalar_grads(double weight_grad, double bias_grad = 0.0) {
  return {Tensor({1, 1}, {weight_grad}), Tensor({1}, {bias_grad})};
}

}  // namespace

TEST_CASE("adam first step from zero parameter with unit gradient") {
  NetworkParams net = scalar_net(0.0);
  AdamState state;
  adam_step(state, net, scalar_grads(1.0));
  // bias-corrected m_hat = 1, v_hat = 1: step is lr / (1 + eps)
  CHECK(net.layers[0].weight.data[0] ==
        doctest::Approx(-9.99999995e-4).epsilon(1e-9));
  CHECK(std::abs(net.layers[0].weight.data[0] - (-1e-3 / (1.0 + 1e-8))) < 1e-18);
  CHECK(state.t == 1);
}

TEST_CASE("adam first-step magnitude equals lr for any nonzero gradient") {
  Rng rng(5);
  for (int k = 0; k < 20; ++k) {
    const double g = (rng.uniform_unit() < 0.5 ? -1.0 : 1.0) * rng.uniform(1e-3, 10.0);
    NetworkParams net = scalar_net(0.0);
    AdamState state;
    adam_step(state, net, scalar_grads(g));
    CHECK(std::abs(std::abs(net.layers[0].weight.data[0]) - state.lr) < 1e-9);
    CHECK(std::signbit(net.layers[0].weight.data[0]) == std::signbit(-g));
  }
}

TEST_CASE("zero gradient forever leaves parameters unchanged") {
  NetworkParams net = scalar_net(1.25);
  AdamState state;
  for (int k = 0; k < 100; ++k) adam_step(state, net, scalar_grads(0.0));
  CHECK(net.layers[0].weight.data[0] == 1.25);

  sgd_step(net, scalar_grads(2.0), 0.0);
  CHECK(net.layers[0].weight.data[0] == 1.25);
}

TEST_CASE("adam trajectories are bit-identical across reruns") {
  auto run = []() {
    Rng rng(9);
    NetworkParams net = scalar_net(0.3);
    AdamState state;
    for (int k = 0; k < 50; ++k) adam_step(state, net, scalar_grads(rng.uniform(-1, 1)));
    return net.layers[0].weight.data[0];
  };
  CHECK(run() == run());
}

TEST_CASE("sgd step: p=1, g=2, lr=0.1 gives 0.8") {
  NetworkParams net = scalar_net(1.0);
  sgd_step(net, scalar_grads(2.0), 0.1);
  CHECK(net.layers[0].weight.data[0] == doctest::Approx(0.8).epsilon(1e-15));
}

TEST_CASE("adam and sgd agree on first-step direction") {
  Rng rng(11);
  for (int k = 0; k < 20; ++k) {
    const double g = rng.uniform(-5.0, 5.0);
    if (g == 0.0) continue;
    NetworkParams adam_net = scalar_net(0.0);
    NetworkParams sgd_net = scalar_net(0.0);
    AdamState state;
    adam_step(state, adam_net, scalar_grads(g));
    sgd_step(sgd_net, scalar_grads(g), 1e-3);
    CHECK(std::signbit(adam_net.layers[0].weight.data[0]) ==
          std::signbit(sgd_net.layers[0].weight.data[0]));
  }
}

TEST_CASE("both optimizers converge on the convex quadratic") {
  // minimize 0.5 * (w - w*)^2, gradient w - w*
  const double target = 0.7;
  {
    NetworkParams net = scalar_net(0.0);
    AdamState state;  // lr 1e-3
    for (int k = 0; k < 10000; ++k)
      adam_step(state, net, scalar_grads(net.layers[0].weight.data[0] - target));
    CHECK(std::abs(net.layers[0].weight.data[0] - target) < 1e-3);
  }
  {
    NetworkParams net = scalar_net(0.0);
    for (int k = 0; k < 10000; ++k)
      sgd_step(net, scalar_grads(net.layers[0].weight.data[0] - target), 1e-3);
    CHECK(std::abs(net.layers[0].weight.data[0] - target) < 1e-3);
  }
}

TEST_CASE("shape and finiteness validation") {
  NetworkParams net = scalar_net(0.0);
  AdamState state;
  CHECK_THROWS_AS(adam_step(state, net, {Tensor({2, 1}, {1.0, 2.0}), Tensor({1}, {0.0})}),
                  Error);
  CHECK_THROWS_AS(
      adam_step(state, net,
                scalar_grads(std::numeric_limits<double>::quiet_NaN())),
      Error);
  CHECK_THROWS_AS(sgd_step(net, {Tensor({1, 1}, {1.0})}, 0.1), Error);
}
