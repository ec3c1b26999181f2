#pragma once

#include <string>

#include "ltc/config.hpp"
#include "ltc/optim.hpp"

namespace ltc {

struct RoleOptState {
  OptSpec spec;
  AdamState adam;  // unused (empty) when spec.kind == Sgd
};

// Full training state: resolved config echo, the four named parameter sets,
// iteration counter, optimizer moments and the training RNG stream.
struct TrainerState {
  TrainConfig config;
  ModelParams model;
  uint64_t iteration = 0;
  RoleOptState opt_encoder;
  RoleOptState opt_decoder;
  RoleOptState opt_energy;
  RoleOptState opt_discriminator;
  std::string rng_state;  // serialized engine; empty = fresh from config.seed
};

// Versioned binary format, magic "LTCKPT01".
void save_checkpoint(const std::string& path, const TrainerState& state);
TrainerState load_checkpoint(const std::string& path);

}  // namespace ltc
