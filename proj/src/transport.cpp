#include "ltc/transport.hpp"

#include <cmath>

namespace ltc {

EnergyGradFn make_energy_grad(const NetworkParams& energy) {
  return [&energy](const Tensor& code, Tensor& grad) -> double {
    Tape tape;
    NodeId c = tape.param(code);
    NodeId e = energy_forward(tape, push_params(tape, energy, false), c);
    tape.backward(e);
    grad = tape.grad(c);
    return tape.value(e).scalar_value();
  };
}

static void langevin_chain(const EnergyGradFn& energy, const Tensor& base,
                           Tensor& state, const LangevinConfig& cfg, Rng& rng,
                           bool state_is_residual) {
  if (cfg.steps < 1) throw Error("langevin: steps must be >= 1");
  if (cfg.step_size_sq <= 0.0) throw Error("langevin: step size must be > 0");
  const double half_sq = 0.5 * cfg.step_size_sq;
  const double noise = std::sqrt(cfg.step_size_sq) * cfg.noise_scale;
  const int d = static_cast<int>(state.data.size());
  Tensor code = state;
  Tensor grad;
  for (int t = 0; t < cfg.steps; ++t) {
    if (state_is_residual)
      for (int i = 0; i < d; ++i) code.data[i] = base.data[i] + state.data[i];
    else
      code.data = state.data;
    double e;
    try {
      e = energy(code, grad);
    } catch (const Error& err) {
      throw Error("langevin step " + std::to_string(t) + ": " + err.what());
    }
    if (!std::isfinite(e))
      throw Error("langevin step " + std::to_string(t) + ": non-finite energy");
    if (!grad.all_finite())
      throw Error("langevin step " + std::to_string(t) + ": non-finite gradient");
    for (int i = 0; i < d; ++i)
      state.data[i] += -half_sq * grad.data[i] + noise * rng.normal();
  }
}

Residual langevin_sample_residual(const EnergyGradFn& energy,
                                  const Tensor& partial_code,
                                  const LangevinConfig& cfg, Rng& rng) {
  Residual r;
  r.values = Tensor::zeros(partial_code.shape);
  langevin_chain(energy, partial_code, r.values, cfg, rng, /*state_is_residual=*/true);
  return r;
}

Tensor langevin_sample_code(const EnergyGradFn& energy, const Tensor& init_code,
                            const LangevinConfig& cfg, Rng& rng) {
  Tensor code = init_code;
  langevin_chain(energy, code, code, cfg, rng, /*state_is_residual=*/false);
  return code;
}

NodeId transport(Tape& tape, NodeId partial_code, const Tensor& residual) {
  if (tape.value(partial_code).shape != residual.shape)
    throw Error("transport: dimension mismatch " +
                shape_str(tape.value(partial_code).shape) + " vs " +
                shape_str(residual.shape));
  return tape.add(partial_code, tape.stop_gradient(tape.constant(residual)));
}

NodeId mean_of(Tape& tape, const std::vector<NodeId>& scalars) {
  if (scalars.empty()) throw Error("mean_of: empty batch");
  NodeId acc = scalars[0];
  for (size_t i = 1; i < scalars.size(); ++i) acc = tape.add(acc, scalars[i]);
  return tape.scalar_mul(acc, 1.0 / static_cast<double>(scalars.size()));
}

NodeId ebm_surrogate_loss(Tape& tape, const ParamNodes& energy_params,
                          const std::vector<Tensor>& transported_codes,
                          const std::vector<Tensor>& complete_codes,
                          double l2_weight) {
  if (transported_codes.empty() || complete_codes.empty())
    throw Error("ebm_surrogate_loss: empty batch");
  std::vector<NodeId> e_complete, e_transported;
  e_complete.reserve(complete_codes.size());
  e_transported.reserve(transported_codes.size());
  for (const Tensor& z : complete_codes)
    e_complete.push_back(energy_forward(tape, energy_params, tape.constant(z)));
  for (const Tensor& z : transported_codes)
    e_transported.push_back(energy_forward(tape, energy_params, tape.constant(z)));

  std::vector<NodeId> sq_complete, sq_transported;
  for (NodeId e : e_complete) sq_complete.push_back(tape.square(e));
  for (NodeId e : e_transported) sq_transported.push_back(tape.square(e));

  NodeId main_term = tape.sub(mean_of(tape, e_complete), mean_of(tape, e_transported));
  NodeId reg = tape.add(mean_of(tape, sq_complete), mean_of(tape, sq_transported));
  return tape.add(main_term, tape.scalar_mul(reg, l2_weight));
}

}  // namespace ltc
