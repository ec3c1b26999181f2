#include "ltc/optim.hpp"

#include <cmath>

namespace ltc {

const char* opt_kind_name(OptKind k) { return k == OptKind::Adam ? "adam" : "sgd"; }

OptKind opt_kind_from_name(const std::string& s) {
  if (s == "adam") return OptKind::Adam;
  if (s == "sgd") return OptKind::Sgd;
  throw Error("unknown optimizer kind: " + s);
}

void AdamState::init(const NetworkParams& net) {
  m.clear();
  v.clear();
  t = 0;
  for (const auto& l : net.layers) {
    m.push_back(Tensor::zeros(l.weight.shape));
    m.push_back(Tensor::zeros(l.bias.shape));
    v.push_back(Tensor::zeros(l.weight.shape));
    v.push_back(Tensor::zeros(l.bias.shape));
  }
}

static void check_grads(const NetworkParams& net, const std::vector<Tensor>& grads,
                        const char* who) {
  if (grads.size() != net.layers.size() * 2)
    throw Error(std::string(who) + ": expected " + std::to_string(net.layers.size() * 2) +
                " gradient tensors, got " + std::to_string(grads.size()));
  for (size_t i = 0; i < net.layers.size(); ++i) {
    const Tensor& pw = net.layers[i].weight;
    const Tensor& pb = net.layers[i].bias;
    if (!grads[2 * i].same_shape(pw) || !grads[2 * i + 1].same_shape(pb))
      throw Error(std::string(who) + ": gradient shape mismatch at layer " +
                  net.layers[i].name);
    if (!grads[2 * i].all_finite() || !grads[2 * i + 1].all_finite())
      throw Error(std::string(who) + ": non-finite gradient at layer " +
                  net.layers[i].name);
  }
}

void adam_step(AdamState& state, NetworkParams& net, const std::vector<Tensor>& grads) {
  if (!state.initialized()) state.init(net);
  check_grads(net, grads, "adam_step");
  state.t += 1;
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.t));
  for (size_t i = 0; i < grads.size(); ++i) {
    Tensor& param = (i % 2 == 0) ? net.layers[i / 2].weight : net.layers[i / 2].bias;
    Tensor& m = state.m[i];
    Tensor& v = state.v[i];
    for (size_t j = 0; j < param.data.size(); ++j) {
      const double g = grads[i].data[j];
      m.data[j] = state.beta1 * m.data[j] + (1.0 - state.beta1) * g;
      v.data[j] = state.beta2 * v.data[j] + (1.0 - state.beta2) * g * g;
      const double m_hat = m.data[j] / bc1;
      const double v_hat = v.data[j] / bc2;
      param.data[j] -= state.lr * m_hat / (std::sqrt(v_hat) + state.eps);
    }
  }
}

void sgd_step(NetworkParams& net, const std::vector<Tensor>& grads, double lr) {
  check_grads(net, grads, "sgd_step");
  for (size_t i = 0; i < grads.size(); ++i) {
    Tensor& param = (i % 2 == 0) ? net.layers[i / 2].weight : net.layers[i / 2].bias;
    for (size_t j = 0; j < param.data.size(); ++j)
      param.data[j] -= lr * grads[i].data[j];
  }
}

}  // namespace ltc
