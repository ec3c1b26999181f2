#include "ltc/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ltc/losses.hpp"
#include "ltc/metrics.hpp"
#include "ltc/networks.hpp"
#include "ltc/rng.hpp"
#include "ltc/transport.hpp"

namespace ltc {

double finite_diff_check(const std::function<double(const std::vector<double>&)>& fn,
                         const std::vector<double>& point,
                         const std::vector<double>& ad_grad, double h) {
  if (h <= 0.0) throw Error("finite_diff_check: h must be > 0");
  if (ad_grad.size() != point.size())
    throw Error("finite_diff_check: gradient size does not match point size");
  std::vector<double> p = point;
  double worst = 0.0;
  for (size_t i = 0; i < point.size(); ++i) {
    p[i] = point[i] + h;
    const double fp = fn(p);
    p[i] = point[i] - h;
    const double fm = fn(p);
    p[i] = point[i];
    if (!std::isfinite(fp) || !std::isfinite(fm))
      throw Error("finite_diff_check: non-finite function value");
    const double fd = (fp - fm) / (2.0 * h);
    const double rel = std::abs(ad_grad[i] - fd) / std::max(1.0, std::abs(fd));
    worst = std::max(worst, rel);
  }
  return worst;
}

static double nn_switch_margin(const Tensor& src, const Tensor& dst) {
  const int ns = src.shape[0], nd = dst.shape[0];
  const double* s = src.data.data();
  const double* d = dst.data.data();
  double margin = std::numeric_limits<double>::infinity();
  for (int i = 0; i < ns; ++i) {
    double best = std::numeric_limits<double>::infinity();
    double second = std::numeric_limits<double>::infinity();
    for (int j = 0; j < nd; ++j) {
      const double dx = s[3 * i] - d[3 * j];
      const double dy = s[3 * i + 1] - d[3 * j + 1];
      const double dz = s[3 * i + 2] - d[3 * j + 2];
      const double dist = std::sqrt(dx * dx + dy * dy + dz * dz);
      if (dist < best) {
        second = best;
        best = dist;
      } else if (dist < second) {
        second = dist;
      }
    }
    margin = std::min(margin, best);  // sqrt is not smooth at zero distance
    if (nd > 1) margin = std::min(margin, second - best);
  }
  return margin;
}

double tape_kink_margin(const Tape& tape) {
  double margin = std::numeric_limits<double>::infinity();
  for (const Node& n : tape.nodes()) {
    switch (n.op) {
      case Op::Relu: {
        const Tensor& x = tape.value(n.in[0]);
        for (double v : x.data) margin = std::min(margin, std::abs(v));
        break;
      }
      case Op::MaxPoints: {
        const Tensor& x = tape.value(n.in[0]);
        const int rows = x.shape[0], cols = x.shape[1];
        if (rows < 2) break;
        for (int j = 0; j < cols; ++j) {
          double best = -std::numeric_limits<double>::infinity();
          double second = best;
          for (int i = 0; i < rows; ++i) {
            const double v = x.at(i, j);
            if (v > best) {
              second = best;
              best = v;
            } else if (v > second) {
              second = v;
            }
          }
          // Exact ties at a relu-clamped zero stay tied under small
          // perturbations; the relu inputs carry the real margin there.
          if (best == second && best == 0.0) continue;
          margin = std::min(margin, best - second);
        }
        break;
      }
      case Op::Chamfer: {
        margin = std::min(margin, nn_switch_margin(tape.value(n.in[0]), tape.value(n.in[1])));
        margin = std::min(margin, nn_switch_margin(tape.value(n.in[1]), tape.value(n.in[0])));
        break;
      }
      case Op::UniChamfer: {
        margin = std::min(margin, nn_switch_margin(tape.value(n.in[0]), tape.value(n.in[1])));
        break;
      }
      default:
        break;
    }
  }
  return margin;
}

static NodeId build_graph(const CheckInstance& inst, const std::vector<double>& flat,
                          Tape& tape, std::vector<NodeId>& leaves) {
  leaves.clear();
  size_t off = 0;
  for (const Tensor& t : inst.init) {
    std::vector<double> d(flat.begin() + off, flat.begin() + off + t.data.size());
    off += t.data.size();
    leaves.push_back(tape.param(Tensor(t.shape, std::move(d))));
  }
  return inst.graph(tape, leaves);
}

static double run_fd_instance_impl(const CheckInstance& inst, double h,
                                   double min_margin, double ad_perturbation) {
  std::vector<double> point;
  for (const Tensor& t : inst.init)
    point.insert(point.end(), t.data.begin(), t.data.end());

  Tape tape;
  std::vector<NodeId> leaves;
  NodeId loss = build_graph(inst, point, tape, leaves);
  if (tape.value(loss).size() != 1)
    throw Error("run_fd_instance: graph must produce a scalar");
  if (tape_kink_margin(tape) < min_margin)
    throw Error("run_fd_instance: kink margin below threshold");
  tape.backward(loss);
  std::vector<double> ad;
  for (NodeId leaf : leaves) {
    const Tensor g = tape.grad(leaf);
    ad.insert(ad.end(), g.data.begin(), g.data.end());
  }
  if (!ad.empty()) ad[0] += ad_perturbation;

  auto fn = [&inst](const std::vector<double>& p) {
    Tape t;
    std::vector<NodeId> l;
    NodeId out = build_graph(inst, p, t, l);
    return t.value(out).scalar_value();
  };
  return finite_diff_check(fn, point, ad, h);
}

double run_fd_instance(const CheckInstance& inst, double h, double min_margin) {
  return run_fd_instance_impl(inst, h, min_margin, 0.0);
}

// ---------------------------------------------------------------------------
// Named suite
// ---------------------------------------------------------------------------

namespace {

Tensor rand_tensor(Rng& rng, std::vector<int> shape, double lo = -1.0, double hi = 1.0) {
  Tensor t = Tensor::zeros(shape);
  for (double& v : t.data) v = rng.uniform(lo, hi);
  return t;
}

Tensor rand_away_from_zero(Rng& rng, std::vector<int> shape, double min_abs) {
  Tensor t = Tensor::zeros(shape);
  for (double& v : t.data) {
    const double sign = rng.uniform_unit() < 0.5 ? -1.0 : 1.0;
    v = sign * rng.uniform(min_abs, 1.0);
  }
  return t;
}

std::vector<int> rand_shape(Rng& rng) {
  if (rng.uniform_unit() < 0.5) return {2 + static_cast<int>(rng.index(6))};
  return {2 + static_cast<int>(rng.index(4)), 2 + static_cast<int>(rng.index(5))};
}

// Consecutive (weight, bias) leaf pairs -> per-layer handles.
ParamNodes pair_up(const std::vector<NodeId>& leaves, size_t first_layer, size_t n_layers) {
  ParamNodes p;
  for (size_t i = 0; i < n_layers; ++i)
    p.push_back({leaves[2 * (first_layer + i)], leaves[2 * (first_layer + i) + 1]});
  return p;
}

void append_net(std::vector<Tensor>& init, const NetworkParams& net) {
  for (const auto& l : net.layers) {
    init.push_back(l.weight);
    init.push_back(l.bias);
  }
}

NetConfig tiny_net_config() {
  NetConfig cfg;
  cfg.n_points = 12;
  cfg.latent_dim = 4;
  cfg.encoder_hidden = {6, 8};
  cfg.decoder_hidden = {8, 10};
  cfg.energy_hidden = {6, 6};
  cfg.disc_point_hidden = {6, 8};
  cfg.disc_head_hidden = {6};
  return cfg;
}

using Generator = std::function<CheckInstance(Rng&)>;

struct NamedCheck {
  std::string name;
  Generator gen;
};

std::vector<NamedCheck> build_checks() {
  std::vector<NamedCheck> checks;

  checks.push_back({"add", [](Rng& rng) {
    CheckInstance inst;
    auto shape = rand_shape(rng);
    inst.init = {rand_tensor(rng, shape), rand_tensor(rng, shape)};
    inst.graph = [](Tape& t, const std::vector<NodeId>& p) {
      return t.reduce_sum(t.square(t.add(p[0], p[1])));
    };
    return inst;
  }});

  checks.push_back({"sub", [](Rng& rng) {
    CheckInstance inst;
    auto shape = rand_shape(rng);
    inst.init = {rand_tensor(rng, shape), rand_tensor(rng, shape)};
    inst.graph = [](Tape& t, const std::vector<NodeId>& p) {
      return t.reduce_sum(t.square(t.sub(p[0], p[1])));
    };
    return inst;
  }});

  checks.push_back({"scalar_mul", [](Rng& rng) {
    CheckInstance inst;
    inst.init = {rand_tensor(rng, rand_shape(rng))};
    const double c = rng.uniform(-2.0, 2.0);
    inst.graph = [c](Tape& t, const std::vector<NodeId>& p) {
      return t.reduce_sum(t.square(t.scalar_mul(p[0], c)));
    };
    return inst;
  }});

  checks.push_back({"matmul", [](Rng& rng) {
    CheckInstance inst;
    const int n = 2 + static_cast<int>(rng.index(4));
    const int k = 2 + static_cast<int>(rng.index(4));
    const int m = 2 + static_cast<int>(rng.index(4));
    inst.init = {rand_tensor(rng, {n, k}), rand_tensor(rng, {k, m})};
    inst.graph = [](Tape& t, const std::vector<NodeId>& p) {
      return t.reduce_sum(t.square(t.matmul(p[0], p[1])));
    };
    return inst;
  }});

  checks.push_back({"matmul_vec", [](Rng& rng) {
    CheckInstance inst;
    const int k = 2 + static_cast<int>(rng.index(4));
    const int m = 2 + static_cast<int>(rng.index(4));
    inst.init = {rand_tensor(rng, {k}), rand_tensor(rng, {k, m})};
    inst.graph = [](Tape& t, const std::vector<NodeId>& p) {
      return t.reduce_sum(t.square(t.matmul(p[0], p[1])));
    };
    return inst;
  }});

  checks.push_back({"relu", [](Rng& rng) {
    CheckInstance inst;
    inst.init = {rand_away_from_zero(rng, rand_shape(rng), 0.05)};
    inst.graph = [](Tape& t, const std::vector<NodeId>& p) {
      return t.reduce_sum(t.square(t.relu(p[0])));
    };
    return inst;
  }});

  checks.push_back({"tanh", [](Rng& rng) {
    CheckInstance inst;
    inst.init = {rand_tensor(rng, rand_shape(rng), -2.0, 2.0)};
    inst.graph = [](Tape& t, const std::vector<NodeId>& p) {
      return t.reduce_sum(t.square(t.tanh_op(p[0])));
    };
    return inst;
  }});

  checks.push_back({"square", [](Rng& rng) {
    CheckInstance inst;
    inst.init = {rand_tensor(rng, rand_shape(rng))};
    inst.graph = [](Tape& t, const std::vector<NodeId>& p) {
      return t.reduce_mean(t.square(p[0]));
    };
    return inst;
  }});

  checks.push_back({"reduce_max_points", [](Rng& rng) {
    CheckInstance inst;
    const int n = 3 + static_cast<int>(rng.index(6));
    const int f = 2 + static_cast<int>(rng.index(5));
    inst.init = {rand_tensor(rng, {n, f})};
    inst.graph = [](Tape& t, const std::vector<NodeId>& p) {
      return t.reduce_sum(t.square(t.reduce_max_points(p[0])));
    };
    return inst;
  }});

  checks.push_back({"reduce_sum", [](Rng& rng) {
    CheckInstance inst;
    inst.init = {rand_tensor(rng, rand_shape(rng))};
    inst.graph = [](Tape& t, const std::vector<NodeId>& p) {
      return t.square(t.reduce_sum(p[0]));
    };
    return inst;
  }});

  checks.push_back({"reduce_mean", [](Rng& rng) {
    CheckInstance inst;
    inst.init = {rand_tensor(rng, rand_shape(rng))};
    inst.graph = [](Tape& t, const std::vector<NodeId>& p) {
      return t.square(t.reduce_mean(p[0]));
    };
    return inst;
  }});

  checks.push_back({"concat_feat_1d", [](Rng& rng) {
    CheckInstance inst;
    inst.init = {rand_tensor(rng, {2 + static_cast<int>(rng.index(4))}),
                 rand_tensor(rng, {2 + static_cast<int>(rng.index(4))})};
    inst.graph = [](Tape& t, const std::vector<NodeId>& p) {
      return t.reduce_sum(t.square(t.concat_feat(p[0], p[1])));
    };
    return inst;
  }});

  checks.push_back({"concat_feat_2d", [](Rng& rng) {
    CheckInstance inst;
    const int n = 2 + static_cast<int>(rng.index(4));
    inst.init = {rand_tensor(rng, {n, 2 + static_cast<int>(rng.index(3))}),
                 rand_tensor(rng, {n, 2 + static_cast<int>(rng.index(3))})};
    inst.graph = [](Tape& t, const std::vector<NodeId>& p) {
      return t.reduce_sum(t.square(t.concat_feat(p[0], p[1])));
    };
    return inst;
  }});

  checks.push_back({"broadcast_points", [](Rng& rng) {
    CheckInstance inst;
    const int f = 2 + static_cast<int>(rng.index(4));
    const int n = 2 + static_cast<int>(rng.index(6));
    inst.init = {rand_tensor(rng, {f})};
    inst.graph = [n](Tape& t, const std::vector<NodeId>& p) {
      return t.reduce_sum(t.square(t.broadcast_points(p[0], n)));
    };
    return inst;
  }});

  checks.push_back({"add_bias_points", [](Rng& rng) {
    CheckInstance inst;
    const int f = 2 + static_cast<int>(rng.index(4));
    const int n = 2 + static_cast<int>(rng.index(6));
    inst.init = {rand_tensor(rng, {n, f}), rand_tensor(rng, {f})};
    inst.graph = [](Tape& t, const std::vector<NodeId>& p) {
      return t.reduce_sum(t.square(t.add_bias_points(p[0], p[1])));
    };
    return inst;
  }});

  checks.push_back({"reshape", [](Rng& rng) {
    CheckInstance inst;
    const int n = 2 + static_cast<int>(rng.index(3));
    const int m = 2 + static_cast<int>(rng.index(3));
    inst.init = {rand_tensor(rng, {n, m})};
    inst.graph = [n, m](Tape& t, const std::vector<NodeId>& p) {
      return t.reduce_sum(t.square(t.reshape(p[0], {m, n})));
    };
    return inst;
  }});

  // Forward identity, zero backward: compared against finite differences of
  // the frozen function (the wrapped operand is captured as a constant).
  checks.push_back({"stop_gradient", [](Rng& rng) {
    CheckInstance inst;
    auto shape = rand_shape(rng);
    Tensor x = rand_tensor(rng, shape);
    Tensor frozen = Tensor::zeros(shape);
    for (size_t i = 0; i < x.data.size(); ++i) frozen.data[i] = x.data[i] * x.data[i];
    inst.init = {x};
    inst.graph = [frozen](Tape& t, const std::vector<NodeId>& p) {
      return t.reduce_sum(t.add(p[0], t.stop_gradient(t.constant(frozen))));
    };
    return inst;
  }});

  checks.push_back({"chamfer", [](Rng& rng) {
    CheckInstance inst;
    inst.init = {rand_tensor(rng, {4 + static_cast<int>(rng.index(8)), 3}),
                 rand_tensor(rng, {4 + static_cast<int>(rng.index(8)), 3})};
    inst.graph = [](Tape& t, const std::vector<NodeId>& p) {
      return t.chamfer(p[0], p[1]);
    };
    return inst;
  }});

  checks.push_back({"chamfer_squared", [](Rng& rng) {
    CheckInstance inst;
    inst.init = {rand_tensor(rng, {4 + static_cast<int>(rng.index(8)), 3}),
                 rand_tensor(rng, {4 + static_cast<int>(rng.index(8)), 3})};
    inst.graph = [](Tape& t, const std::vector<NodeId>& p) {
      return t.chamfer(p[0], p[1], true);
    };
    return inst;
  }});

  checks.push_back({"unidirectional_chamfer", [](Rng& rng) {
    CheckInstance inst;
    inst.init = {rand_tensor(rng, {4 + static_cast<int>(rng.index(8)), 3}),
                 rand_tensor(rng, {4 + static_cast<int>(rng.index(8)), 3})};
    inst.graph = [](Tape& t, const std::vector<NodeId>& p) {
      return t.unidirectional_chamfer(p[0], p[1]);
    };
    return inst;
  }});

  checks.push_back({"min_zero", [](Rng& rng) {
    CheckInstance inst;
    inst.init = {rand_away_from_zero(rng, {1}, 0.05)};
    inst.graph = [](Tape& t, const std::vector<NodeId>& p) {
      return min_zero(t, p[0]);
    };
    return inst;
  }});

  // --- network forwards composed with the losses, tiny dimensions ---

  checks.push_back({"encoder_decoder_chamfer", [](Rng& rng) {
    const NetConfig cfg = tiny_net_config();
    const ModelParams m = init_params(cfg, rng.next_u64());
    CheckInstance inst;
    append_net(inst.init, m.encoder);
    append_net(inst.init, m.decoder);
    const Tensor cloud = rand_tensor(rng, {cfg.n_points, 3}, -0.5, 0.5);
    const Tensor target = rand_tensor(rng, {cfg.n_points, 3}, -0.5, 0.5);
    const size_t n_enc = m.encoder.layers.size();
    const size_t n_dec = m.decoder.layers.size();
    const int n_points = cfg.n_points;
    inst.graph = [cloud, target, n_enc, n_dec, n_points](Tape& t,
                                                         const std::vector<NodeId>& p) {
      ParamNodes enc = pair_up(p, 0, n_enc);
      ParamNodes dec = pair_up(p, n_enc, n_dec);
      NodeId code = encoder_forward(t, enc, t.constant(cloud), n_points);
      NodeId out = decoder_forward(t, dec, code);
      return recon_loss(t, t.constant(target), out);
    };
    return inst;
  }});

  checks.push_back({"decoder_chamfer", [](Rng& rng) {
    const NetConfig cfg = tiny_net_config();
    const ModelParams m = init_params(cfg, rng.next_u64());
    CheckInstance inst;
    append_net(inst.init, m.decoder);
    inst.init.push_back(rand_tensor(rng, {cfg.latent_dim}));
    const Tensor target = rand_tensor(rng, {cfg.n_points, 3}, -0.5, 0.5);
    const size_t n_dec = m.decoder.layers.size();
    inst.graph = [target, n_dec](Tape& t, const std::vector<NodeId>& p) {
      ParamNodes dec = pair_up(p, 0, n_dec);
      NodeId out = decoder_forward(t, dec, p[2 * n_dec]);
      return recon_loss(t, t.constant(target), out);
    };
    return inst;
  }});

  checks.push_back({"transport_decoder_fidelity", [](Rng& rng) {
    const NetConfig cfg = tiny_net_config();
    const ModelParams m = init_params(cfg, rng.next_u64());
    CheckInstance inst;
    append_net(inst.init, m.encoder);
    append_net(inst.init, m.decoder);
    const Tensor cloud = rand_tensor(rng, {cfg.n_points, 3}, -0.5, 0.5);
    const Tensor residual = rand_tensor(rng, {cfg.latent_dim}, -0.3, 0.3);
    const size_t n_enc = m.encoder.layers.size();
    const size_t n_dec = m.decoder.layers.size();
    const int n_points = cfg.n_points;
    inst.graph = [cloud, residual, n_enc, n_dec, n_points](
                     Tape& t, const std::vector<NodeId>& p) {
      ParamNodes enc = pair_up(p, 0, n_enc);
      ParamNodes dec = pair_up(p, n_enc, n_dec);
      NodeId x = t.constant(cloud);
      NodeId code = encoder_forward(t, enc, x, n_points);
      NodeId moved = transport(t, code, residual);
      NodeId completed = decoder_forward(t, dec, moved);
      return fidelity_loss(t, x, completed);
    };
    return inst;
  }});

  checks.push_back({"energy_wrt_code", [](Rng& rng) {
    const NetConfig cfg = tiny_net_config();
    const ModelParams m = init_params(cfg, rng.next_u64());
    CheckInstance inst;
    inst.init = {rand_tensor(rng, {cfg.latent_dim})};
    const NetworkParams energy = m.energy;
    inst.graph = [energy](Tape& t, const std::vector<NodeId>& p) {
      return energy_forward(t, push_params(t, energy, false), p[0]);
    };
    return inst;
  }});

  checks.push_back({"energy_wrt_params", [](Rng& rng) {
    const NetConfig cfg = tiny_net_config();
    const ModelParams m = init_params(cfg, rng.next_u64());
    CheckInstance inst;
    append_net(inst.init, m.energy);
    const Tensor code = rand_tensor(rng, {cfg.latent_dim});
    const size_t n_layers = m.energy.layers.size();
    inst.graph = [code, n_layers](Tape& t, const std::vector<NodeId>& p) {
      return energy_forward(t, pair_up(p, 0, n_layers), t.constant(code));
    };
    return inst;
  }});

  checks.push_back({"discriminator_score", [](Rng& rng) {
    const NetConfig cfg = tiny_net_config();
    const ModelParams m = init_params(cfg, rng.next_u64());
    CheckInstance inst;
    append_net(inst.init, m.discriminator);
    const Tensor cloud = rand_tensor(rng, {cfg.n_points, 3}, -0.5, 0.5);
    const size_t n_layers = m.discriminator.layers.size();
    const int point_layers = m.discriminator.point_layers;
    const int n_points = cfg.n_points;
    inst.graph = [cloud, n_layers, point_layers, n_points](Tape& t,
                                                           const std::vector<NodeId>& p) {
      return discriminator_forward(t, pair_up(p, 0, n_layers), t.constant(cloud),
                                   point_layers, n_points);
    };
    return inst;
  }});

  checks.push_back({"ebm_surrogate_wrt_params", [](Rng& rng) {
    const NetConfig cfg = tiny_net_config();
    const ModelParams m = init_params(cfg, rng.next_u64());
    CheckInstance inst;
    append_net(inst.init, m.energy);
    std::vector<Tensor> transported, complete;
    for (int i = 0; i < 3; ++i) {
      transported.push_back(rand_tensor(rng, {cfg.latent_dim}));
      complete.push_back(rand_tensor(rng, {cfg.latent_dim}));
    }
    const size_t n_layers = m.energy.layers.size();
    inst.graph = [transported, complete, n_layers](Tape& t,
                                                   const std::vector<NodeId>& p) {
      return ebm_surrogate_loss(t, pair_up(p, 0, n_layers), transported, complete, 0.1);
    };
    return inst;
  }});

  checks.push_back({"discriminator_hinge_loss", [](Rng& rng) {
    const NetConfig cfg = tiny_net_config();
    const ModelParams m = init_params(cfg, rng.next_u64());
    CheckInstance inst;
    append_net(inst.init, m.discriminator);
    std::vector<Tensor> real, fake;
    for (int i = 0; i < 2; ++i) {
      real.push_back(rand_tensor(rng, {cfg.n_points, 3}, -0.5, 0.5));
      fake.push_back(rand_tensor(rng, {cfg.n_points, 3}, -0.5, 0.5));
    }
    const size_t n_layers = m.discriminator.layers.size();
    const int point_layers = m.discriminator.point_layers;
    const int n_points = cfg.n_points;
    inst.graph = [real, fake, n_layers, point_layers, n_points](
                     Tape& t, const std::vector<NodeId>& p) {
      std::vector<NodeId> real_ids, fake_ids;
      for (const Tensor& c : real) real_ids.push_back(t.constant(c));
      for (const Tensor& c : fake) fake_ids.push_back(t.constant(c));
      return discriminator_loss(t, pair_up(p, 0, n_layers), point_layers, real_ids,
                                fake_ids, n_points);
    };
    return inst;
  }});

  checks.push_back({"encoder_decoder_loss_full", [](Rng& rng) {
    const NetConfig cfg = tiny_net_config();
    const ModelParams m = init_params(cfg, rng.next_u64());
    CheckInstance inst;
    append_net(inst.init, m.encoder);
    append_net(inst.init, m.decoder);
    const Tensor partial = rand_tensor(rng, {cfg.n_points, 3}, -0.5, 0.5);
    const Tensor complete = rand_tensor(rng, {cfg.n_points, 3}, -0.5, 0.5);
    const Tensor residual = rand_tensor(rng, {cfg.latent_dim}, -0.3, 0.3);
    const NetworkParams disc = m.discriminator;
    const size_t n_enc = m.encoder.layers.size();
    const size_t n_dec = m.decoder.layers.size();
    const int n_points = cfg.n_points;
    inst.graph = [partial, complete, residual, disc, n_enc, n_dec, n_points](
                     Tape& t, const std::vector<NodeId>& p) {
      ParamNodes enc = pair_up(p, 0, n_enc);
      ParamNodes dec = pair_up(p, n_enc, n_dec);
      ParamNodes disc_nodes = push_params(t, disc, false);
      NodeId x = t.constant(partial);
      NodeId y = t.constant(complete);
      NodeId partial_code = encoder_forward(t, enc, x, n_points);
      NodeId complete_code = encoder_forward(t, enc, y, n_points);
      NodeId moved = transport(t, partial_code, residual);
      NodeId completed_x = decoder_forward(t, dec, moved);
      NodeId recon_y = decoder_forward(t, dec, complete_code);
      NodeId recon = recon_loss(t, y, recon_y);
      NodeId fidelity = fidelity_loss(t, x, completed_x);
      NodeId adv = generator_adv_term(t, disc_nodes, disc.point_layers, {completed_x},
                                      n_points);
      return encoder_decoder_loss(t, recon, fidelity, adv, LossWeights{});
    };
    return inst;
  }});

  return checks;
}

}  // namespace

std::vector<SuiteCheckResult> run_gradcheck_suite(const GradcheckOptions& opt) {
  const auto checks = build_checks();
  std::vector<SuiteCheckResult> results;
  results.reserve(checks.size());
  const double perturbation = opt.sabotage ? 1e-2 : 0.0;
  for (const auto& check : checks) {
    Rng rng(mix_seed(opt.seed, std::hash<std::string>{}(check.name)));
    SuiteCheckResult res;
    res.name = check.name;
    res.tolerance = opt.tolerance;
    for (int k = 0; k < opt.instances; ++k) {
      double err = 0.0;
      int attempts = 0;
      for (;;) {
        CheckInstance inst = check.gen(rng);
        try {
          err = run_fd_instance_impl(inst, opt.h, 2e-4, perturbation);
          break;
        } catch (const Error&) {
          if (++attempts > 100)
            throw Error(check.name + ": could not draw a well-separated instance");
        }
      }
      res.worst_rel_err = std::max(res.worst_rel_err, err);
    }
    res.pass = res.worst_rel_err < res.tolerance;
    results.push_back(res);
  }
  return results;
}

}  // namespace ltc
