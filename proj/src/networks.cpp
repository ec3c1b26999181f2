#include "ltc/networks.hpp"

#include <cmath>

namespace ltc {

LatentCode::LatentCode(Tensor v) : values(std::move(v)) {
  if (values.shape.size() != 1 || values.shape[0] < 1)
    throw Error("latent code: expected 1-D vector, got " + shape_str(values.shape));
  if (!values.all_finite()) throw Error("latent code: non-finite values");
}

const char* role_name(Role r) {
  switch (r) {
    case Role::Encoder: return "encoder";
    case Role::Decoder: return "decoder";
    case Role::Energy: return "energy";
    case Role::Discriminator: return "discriminator";
  }
  return "?";
}

int64_t NetworkParams::param_count() const {
  int64_t n = 0;
  for (const auto& l : layers) n += l.weight.size() + l.bias.size();
  return n;
}

static DenseLayer make_layer(const std::string& name, int in, int out, Rng& rng) {
  DenseLayer l;
  l.name = name;
  const double s = std::sqrt(6.0 / (in + out));
  std::vector<double> w(static_cast<size_t>(in) * out);
  for (double& v : w) v = rng.uniform(-s, s);
  l.weight = Tensor({in, out}, std::move(w));
  l.bias = Tensor::zeros({out});
  return l;
}

static NetworkParams make_mlp(Role role, const std::string& prefix, int in,
                              const std::vector<int>& hidden, int out, Rng& rng) {
  NetworkParams net;
  net.role = role;
  int cur = in;
  int idx = 1;
  for (int h : hidden) {
    net.layers.push_back(make_layer(prefix + "fc" + std::to_string(idx++), cur, h, rng));
    cur = h;
  }
  net.layers.push_back(make_layer(prefix + "fc" + std::to_string(idx), cur, out, rng));
  return net;
}

ModelParams init_params(const NetConfig& cfg, uint64_t seed) {
  if (cfg.n_points < 1 || cfg.latent_dim < 1)
    throw Error("init_params: invalid dims");
  Rng rng(mix_seed(seed, 0x70617261));
  ModelParams m;
  m.encoder = make_mlp(Role::Encoder, "enc.", 3, cfg.encoder_hidden, cfg.latent_dim, rng);
  m.decoder = make_mlp(Role::Decoder, "dec.", cfg.latent_dim, cfg.decoder_hidden,
                       3 * cfg.n_points, rng);
  m.energy = make_mlp(Role::Energy, "ebm.", cfg.latent_dim, cfg.energy_hidden, 1, rng);

  m.discriminator.role = Role::Discriminator;
  int cur = 3;
  int idx = 1;
  for (int h : cfg.disc_point_hidden) {
    m.discriminator.layers.push_back(
        make_layer("disc.point" + std::to_string(idx++), cur, h, rng));
    cur = h;
  }
  m.discriminator.point_layers = static_cast<int>(m.discriminator.layers.size());
  idx = 1;
  for (int h : cfg.disc_head_hidden) {
    m.discriminator.layers.push_back(
        make_layer("disc.head" + std::to_string(idx++), cur, h, rng));
    cur = h;
  }
  m.discriminator.layers.push_back(make_layer("disc.out", cur, 1, rng));
  return m;
}

ParamNodes push_params(Tape& tape, const NetworkParams& net, bool trainable) {
  ParamNodes nodes;
  nodes.reserve(net.layers.size());
  for (const auto& l : net.layers) {
    LayerNodes ln;
    ln.weight = trainable ? tape.param(l.weight) : tape.constant(l.weight);
    ln.bias = trainable ? tape.param(l.bias) : tape.constant(l.bias);
    nodes.push_back(ln);
  }
  return nodes;
}

std::vector<Tensor> collect_grads(const Tape& tape, const ParamNodes& nodes) {
  std::vector<Tensor> grads;
  grads.reserve(nodes.size() * 2);
  for (const auto& ln : nodes) {
    grads.push_back(tape.grad(ln.weight));
    grads.push_back(tape.grad(ln.bias));
  }
  return grads;
}

static void check_points(const Tape& tape, NodeId cloud, int expected, const char* who) {
  const Tensor& v = tape.value(cloud);
  if (v.shape.size() != 2 || v.shape[1] != 3)
    throw Error(std::string(who) + ": expected [n,3] cloud, got " + shape_str(v.shape));
  if (expected > 0 && v.shape[0] != expected)
    throw Error(std::string(who) + ": expected " + std::to_string(expected) +
                " points, got " + std::to_string(v.shape[0]));
}

// Shared per-point stack: rows x in -> rows x out, ReLU on all but the last
// listed layer.
static NodeId per_point_stack(Tape& tape, const ParamNodes& params, size_t first,
                              size_t count, NodeId rows_node, bool relu_last) {
  NodeId h = rows_node;
  for (size_t i = 0; i < count; ++i) {
    const LayerNodes& l = params[first + i];
    h = tape.add_bias_points(tape.matmul(h, l.weight), l.bias);
    if (relu_last || i + 1 < count) h = tape.relu(h);
  }
  return h;
}

static NodeId vector_stack(Tape& tape, const ParamNodes& params, size_t first,
                           size_t count, NodeId vec_node) {
  NodeId h = vec_node;
  for (size_t i = 0; i < count; ++i) {
    const LayerNodes& l = params[first + i];
    h = tape.matmul(h, l.weight);
    h = tape.add(h, l.bias);
    if (i + 1 < count) h = tape.relu(h);
  }
  return h;
}

NodeId encoder_forward(Tape& tape, const ParamNodes& params, NodeId cloud,
                       int expected_points) {
  check_points(tape, cloud, expected_points, "encoder");
  NodeId features = per_point_stack(tape, params, 0, params.size(), cloud,
                                    /*relu_last=*/false);
  return tape.reduce_max_points(features);
}

NodeId decoder_forward(Tape& tape, const ParamNodes& params, NodeId code) {
  const Tensor& v = tape.value(code);
  if (v.shape.size() != 1)
    throw Error("decoder: expected 1-D latent code, got " + shape_str(v.shape));
  NodeId flat = vector_stack(tape, params, 0, params.size(), code);
  const int out = tape.value(flat).shape[0];
  if (out % 3 != 0) throw Error("decoder: output width not divisible by 3");
  return tape.reshape(flat, {out / 3, 3});
}

NodeId energy_forward(Tape& tape, const ParamNodes& params, NodeId code) {
  const Tensor& v = tape.value(code);
  if (v.shape.size() != 1)
    throw Error("energy: expected 1-D latent code, got " + shape_str(v.shape));
  return vector_stack(tape, params, 0, params.size(), code);
}

NodeId discriminator_forward(Tape& tape, const ParamNodes& params, NodeId cloud,
                             int point_layers, int expected_points) {
  check_points(tape, cloud, expected_points, "discriminator");
  NodeId features = per_point_stack(tape, params, 0, point_layers, cloud,
                                    /*relu_last=*/true);
  NodeId pooled = tape.reduce_max_points(features);
  return vector_stack(tape, params, point_layers, params.size() - point_layers, pooled);
}

}  // namespace ltc
