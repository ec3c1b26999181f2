#pragma once

#include <functional>
#include <vector>

#include "ltc/networks.hpp"
#include "ltc/rng.hpp"
#include "ltc/tape.hpp"

namespace ltc {

// Code gap between the partial and complete latent spaces. Chains start at
// the zero vector and stay finite step by step.
struct Residual {
  Tensor values;  // shape {d}
};

struct LangevinConfig {
  int steps = 8;
  double step_size_sq = 0.05;  // squared step size of the update rule
  double noise_scale = 1.0;    // multiplier on the injected noise term
};

// Evaluates the energy at a code and fills dE/dcode. Lets the sampler run
// against either the learned energy net or an analytic test energy.
using EnergyGradFn = std::function<double(const Tensor& code, Tensor& grad)>;

// Energy-net-backed evaluator; builds a small throwaway tape per call.
EnergyGradFn make_energy_grad(const NetworkParams& energy);

// Runs `steps` noisy gradient-descent updates of the residual under the
// energy of (partial_code + residual), starting from zero:
//   r <- r - (step_size_sq/2) * dE/dr + sqrt(step_size_sq) * noise_scale * eps
// The result carries no differentiation history. Non-finite energy or
// gradient raises an error naming the failing step.
Residual langevin_sample_residual(const EnergyGradFn& energy,
                                  const Tensor& partial_code,
                                  const LangevinConfig& cfg, Rng& rng);

// Ablation path: same chain over the full code starting from init_code,
// no residual involved.
Tensor langevin_sample_code(const EnergyGradFn& energy, const Tensor& init_code,
                            const LangevinConfig& cfg, Rng& rng);

// transported = partial_code + stop_gradient(residual). Backward passes an
// identity Jacobian to the partial code and exactly zero to the residual.
NodeId transport(Tape& tape, NodeId partial_code, const Tensor& residual);

// Contrastive surrogate whose gradient descent raises energy on transported
// codes and lowers it on complete-data codes, plus an l2 magnitude
// regularizer on both branches:
//   mean E(z_complete) - mean E(z_transported)
//     + l2_weight * (mean E(z_complete)^2 + mean E(z_transported)^2)
// Both code batches enter as constants; only the energy parameters train.
NodeId ebm_surrogate_loss(Tape& tape, const ParamNodes& energy_params,
                          const std::vector<Tensor>& transported_codes,
                          const std::vector<Tensor>& complete_codes,
                          double l2_weight);

// Mean of scalar nodes, accumulated in index order.
NodeId mean_of(Tape& tape, const std::vector<NodeId>& scalars);

}  // namespace ltc
