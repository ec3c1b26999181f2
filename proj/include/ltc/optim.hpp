#pragma once

#include <cstdint>
#include <vector>

#include "ltc/networks.hpp"

namespace ltc {

enum class OptKind : uint8_t { Adam, Sgd };

const char* opt_kind_name(OptKind k);
OptKind opt_kind_from_name(const std::string& s);

// Bias-corrected Adam moments, one (m, v) pair per parameter tensor in
// (weight, bias) layer order.
struct AdamState {
  std::vector<Tensor> m;
  std::vector<Tensor> v;
  int64_t t = 0;
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  void init(const NetworkParams& net);
  bool initialized() const { return !m.empty(); }
};

// Standard bias-corrected Adam update, in place. Gradients follow the
// (weight, bias) per-layer order of collect_grads.
void adam_step(AdamState& state, NetworkParams& net, const std::vector<Tensor>& grads);

// p <- p - lr * g
void sgd_step(NetworkParams& net, const std::vector<Tensor>& grads, double lr);

}  // namespace ltc
