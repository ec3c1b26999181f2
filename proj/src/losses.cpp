#include "ltc/losses.hpp"

#include "ltc/transport.hpp"

namespace ltc {

NodeId recon_loss(Tape& tape, NodeId target_cloud, NodeId recon_cloud, bool squared) {
  return tape.chamfer(target_cloud, recon_cloud, squared);
}

NodeId fidelity_loss(Tape& tape, NodeId partial_cloud, NodeId completed_cloud,
                     bool squared) {
  return tape.unidirectional_chamfer(partial_cloud, completed_cloud, squared);
}

NodeId min_zero(Tape& tape, NodeId x) {
  return tape.scalar_mul(tape.relu(tape.scalar_mul(x, -1.0)), -1.0);
}

NodeId discriminator_loss(Tape& tape, const ParamNodes& disc_params, int point_layers,
                          const std::vector<NodeId>& real_clouds,
                          const std::vector<NodeId>& fake_clouds, int expected_points) {
  if (real_clouds.empty() || fake_clouds.empty())
    throw Error("discriminator_loss: empty batch");
  std::vector<NodeId> real_hinges, fake_hinges;
  for (NodeId c : real_clouds) {
    NodeId score = discriminator_forward(tape, disc_params, c, point_layers,
                                         expected_points);
    NodeId shifted = tape.add(tape.constant(Tensor::scalar(-1.0)), score);
    real_hinges.push_back(min_zero(tape, shifted));
  }
  for (NodeId c : fake_clouds) {
    NodeId score = discriminator_forward(tape, disc_params, c, point_layers,
                                         expected_points);
    NodeId shifted = tape.sub(tape.constant(Tensor::scalar(-1.0)), score);
    fake_hinges.push_back(min_zero(tape, shifted));
  }
  NodeId objective = tape.add(mean_of(tape, real_hinges), mean_of(tape, fake_hinges));
  return tape.scalar_mul(objective, -1.0);
}

NodeId generator_adv_term(Tape& tape, const ParamNodes& disc_params, int point_layers,
                          const std::vector<NodeId>& completed_clouds,
                          int expected_points) {
  if (completed_clouds.empty()) throw Error("generator_adv_term: empty batch");
  std::vector<NodeId> scores;
  for (NodeId c : completed_clouds)
    scores.push_back(
        discriminator_forward(tape, disc_params, c, point_layers, expected_points));
  return tape.scalar_mul(mean_of(tape, scores), -1.0);
}

NodeId encoder_decoder_loss(Tape& tape, NodeId recon, NodeId fidelity, NodeId adv_term,
                            const LossWeights& w) {
  NodeId total = tape.add(recon, tape.scalar_mul(fidelity, w.fidelity_weight));
  return tape.add(total, tape.scalar_mul(adv_term, w.adversarial_weight));
}

}  // namespace ltc
