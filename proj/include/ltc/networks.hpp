#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ltc/rng.hpp"
#include "ltc/tape.hpp"

namespace ltc {

// d-dimensional latent vector shared by partial codes, complete codes,
// residuals and transported codes.
struct LatentCode {
  Tensor values;  // shape {d}

  LatentCode() = default;
  explicit LatentCode(Tensor v);
  int dim() const { return values.shape.empty() ? 0 : values.shape[0]; }
};

enum class Role : uint8_t { Encoder, Decoder, Energy, Discriminator };

const char* role_name(Role r);

struct DenseLayer {
  std::string name;
  Tensor weight;  // shape {in, out}
  Tensor bias;    // shape {out}
};

// Flat parameter store for one network: named dense layers plus a role tag.
// For the discriminator, the first `point_layers` layers run per point
// before the max-pool; the rest form the scoring head.
struct NetworkParams {
  Role role = Role::Encoder;
  std::vector<DenseLayer> layers;
  int point_layers = 0;

  int64_t param_count() const;
};

// Layer widths for the four networks. The encoder applies its layers per
// point (input width 3) and max-pools; the decoder maps the latent code to
// 3*n_points values.
struct NetConfig {
  int n_points = 256;
  int latent_dim = 64;
  std::vector<int> encoder_hidden = {64, 128};
  std::vector<int> decoder_hidden = {256, 512};
  std::vector<int> energy_hidden = {128, 128};
  std::vector<int> disc_point_hidden = {64, 128};
  std::vector<int> disc_head_hidden = {64};
};

// One shared encoder, one shared decoder, the energy net and the
// discriminator. Both shape domains go through the same encoder/decoder
// parameters.
struct ModelParams {
  NetworkParams encoder;
  NetworkParams decoder;
  NetworkParams energy;
  NetworkParams discriminator;
};

// Glorot-uniform weights (s = sqrt(6/(fan_in+fan_out))), zero biases.
// Deterministic given the seed.
ModelParams init_params(const NetConfig& cfg, uint64_t seed);

// Handles of one network's parameters pushed onto a tape, layer order
// preserved.
struct LayerNodes {
  NodeId weight;
  NodeId bias;
};
using ParamNodes = std::vector<LayerNodes>;

ParamNodes push_params(Tape& tape, const NetworkParams& net, bool trainable);

// Gradients for every layer of `net` in (weight, bias) pairs, flattened.
std::vector<Tensor> collect_grads(const Tape& tape, const ParamNodes& nodes);

// Per-point MLP with ReLU hidden activations followed by a max-pool over
// the point axis; permutation-invariant by construction. `cloud` must hold
// exactly `expected_points` rows.
NodeId encoder_forward(Tape& tape, const ParamNodes& params, NodeId cloud,
                       int expected_points);

// MLP from latent code to n x 3 points; deterministic given (params, code),
// so decoded point indices are stable across calls.
NodeId decoder_forward(Tape& tape, const ParamNodes& params, NodeId code);

// Scalar energy of a latent code; no final nonlinearity.
NodeId energy_forward(Tape& tape, const ParamNodes& params, NodeId code);

// Per-point MLP + max-pool + scoring head; unbounded real output.
NodeId discriminator_forward(Tape& tape, const ParamNodes& params, NodeId cloud,
                             int point_layers, int expected_points);

}  // namespace ltc
