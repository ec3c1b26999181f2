#pragma once

#include <vector>

#include "ltc/networks.hpp"
#include "ltc/tape.hpp"

namespace ltc {

struct LossWeights {
  double fidelity_weight = 2.0;     // on the partial->prediction distance term
  double adversarial_weight = 1.0;  // on the generator score term
  double energy_l2 = 0.1;           // magnitude regularizer in the energy loss
};

// Chamfer distance between a target cloud and its reconstruction.
NodeId recon_loss(Tape& tape, NodeId target_cloud, NodeId recon_cloud,
                  bool squared = false);

// Unidirectional chamfer from the partial input to the completed cloud;
// measures how much of the observed geometry the prediction preserves.
NodeId fidelity_loss(Tape& tape, NodeId partial_cloud, NodeId completed_cloud,
                     bool squared = false);

// min(0, x) built from existing primitives: -relu(-x).
NodeId min_zero(Tape& tape, NodeId x);

// Hinge objective for the discriminator, as a minimization target:
//   -( mean min(0, -1 + D(real_i)) + mean min(0, -1 - D(fake_i)) )
// Zero iff D(real) >= 1 and D(fake) <= -1 on every element.
NodeId discriminator_loss(Tape& tape, const ParamNodes& disc_params, int point_layers,
                          const std::vector<NodeId>& real_clouds,
                          const std::vector<NodeId>& fake_clouds, int expected_points);

// Generator-side score term, -mean D(completed); the discriminator
// parameters are entered as constants on this tape.
NodeId generator_adv_term(Tape& tape, const ParamNodes& disc_params, int point_layers,
                          const std::vector<NodeId>& completed_clouds,
                          int expected_points);

// recon + fidelity_weight * fidelity + adversarial_weight * adv_term.
NodeId encoder_decoder_loss(Tape& tape, NodeId recon, NodeId fidelity, NodeId adv_term,
                            const LossWeights& w);

}  // namespace ltc
