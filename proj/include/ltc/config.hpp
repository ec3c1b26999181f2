#pragma once

#include <string>

#include "ltc/losses.hpp"
#include "ltc/networks.hpp"
#include "ltc/optim.hpp"
#include "ltc/synth.hpp"
#include "ltc/transport.hpp"

namespace ltc {

struct OptSpec {
  OptKind kind = OptKind::Adam;
  double lr = 1e-3;
};

// Everything a run needs. Defaults follow the reference setup; any field is
// overridable from a JSON config file, and command-line flags override the
// file.
struct TrainConfig {
  NetConfig net;
  LangevinConfig langevin;
  LossWeights weights;
  OptSpec opt_encoder;
  OptSpec opt_decoder;
  OptSpec opt_energy;
  OptSpec opt_discriminator;
  int batch_size = 16;
  int iterations = 2000;
  uint64_t seed = 0;
  bool disable_eb_transport = false;
  bool disable_residual_sampling = false;
  bool disable_adversarial = false;
  int checkpoint_every = 500;
  int log_every = 1;
  bool squared_chamfer = false;
  std::string adv_real_source = "reconstruction";  // or "data"
  DatasetConfig dataset;

  void validate() const;
};

// Defaults overlaid with the file's fields; unknown keys are rejected.
TrainConfig load_config(const std::string& path);
TrainConfig config_from_json_text(const std::string& text);
void apply_config_text(TrainConfig& cfg, const std::string& text);

// Resolved-config echo, also embedded in checkpoints.
std::string config_dump(const TrainConfig& cfg);

bool config_equal_ignoring_iterations(const TrainConfig& a, const TrainConfig& b);

}  // namespace ltc
