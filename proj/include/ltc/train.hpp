#pragma once

#include <string>
#include <vector>

#include "ltc/checkpoint.hpp"
#include "ltc/config.hpp"
#include "ltc/metrics.hpp"
#include "ltc/rng.hpp"
#include "ltc/synth.hpp"

namespace ltc {

struct TrainLogRecord {
  int64_t iteration = 0;
  double recon = 0.0;
  double fidelity = 0.0;
  double adv_disc = 0.0;
  double adv_gen = 0.0;
  double ebm_surrogate = 0.0;
  double mean_energy_complete = 0.0;
  double mean_energy_transported = 0.0;
  double wall_ms = 0.0;  // in-memory only; kept out of the log file so
                         // identical seeds produce bit-identical logs
};

// Resolved wiring of the three ablation switches.
struct EffectiveWiring {
  bool transport_enabled = true;   // langevin sampling + energy updates
  bool residual_path = true;       // residual + stop-gradient vs full-code chain
  bool adversarial_enabled = true; // discriminator losses + updates
  double adversarial_weight = 1.0;
};

EffectiveWiring apply_ablation(const TrainConfig& cfg);

// Owns the model, optimizer states and the training RNG stream. One step
// runs, in order: encode both batches, transport the partial codes, decode,
// update encoder+decoder, update the energy net, update the discriminator.
class Trainer {
 public:
  explicit Trainer(const TrainConfig& cfg);     // fresh parameters from cfg.seed
  explicit Trainer(const TrainerState& state);  // resume

  TrainLogRecord step(const std::vector<const PointCloud*>& batch_partial,
                      const std::vector<const PointCloud*>& batch_complete);

  TrainerState snapshot() const;
  const TrainConfig& config() const { return cfg_; }
  const ModelParams& model() const { return model_; }
  ModelParams& mutable_model() { return model_; }
  uint64_t iteration() const { return iteration_; }
  Rng& rng() { return rng_; }

  // Node count of the last encoder-decoder tape; independent of the number
  // of Langevin steps since chains run outside the training graph.
  size_t last_ed_tape_nodes() const { return last_ed_tape_nodes_; }

 private:
  TrainConfig cfg_;
  ModelParams model_;
  RoleOptState opt_encoder_, opt_decoder_, opt_energy_, opt_discriminator_;
  Rng rng_;
  uint64_t iteration_ = 0;
  size_t last_ed_tape_nodes_ = 0;
};

struct RunResult {
  std::string final_checkpoint;
  std::string log_path;
  uint64_t iterations_run = 0;
};

// Trains for cfg.iterations, checkpointing at the configured cadence and
// appending one record per logged iteration to <out_dir>/train_log.tsv.
// With resume=true, continues from the newest checkpoint in out_dir.
RunResult run_training(const TrainConfig& cfg, const DatasetSplit& data,
                       const std::string& out_dir, bool resume = false,
                       bool quiet = false);

std::string log_header();
std::string log_line(const TrainLogRecord& r);

}  // namespace ltc
