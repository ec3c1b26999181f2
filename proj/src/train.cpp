#include "ltc/train.hpp"

#include <chrono>
#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "ltc/losses.hpp"
#include "ltc/transport.hpp"

namespace fs = std::filesystem;

namespace ltc {

EffectiveWiring apply_ablation(const TrainConfig& cfg) {
  EffectiveWiring w;
  w.transport_enabled = !cfg.disable_eb_transport;
  w.residual_path = !cfg.disable_residual_sampling;
  w.adversarial_enabled = !cfg.disable_adversarial;
  w.adversarial_weight = cfg.disable_adversarial ? 0.0 : cfg.weights.adversarial_weight;
  return w;
}

Trainer::Trainer(const TrainConfig& cfg)
    : cfg_(cfg),
      model_(init_params(cfg.net, cfg.seed)),
      rng_(mix_seed(cfg.seed, 0x747261696e)) {
  cfg_.validate();
  opt_encoder_.spec = cfg.opt_encoder;
  opt_decoder_.spec = cfg.opt_decoder;
  opt_energy_.spec = cfg.opt_energy;
  opt_discriminator_.spec = cfg.opt_discriminator;
}

Trainer::Trainer(const TrainerState& state)
    : cfg_(state.config),
      model_(state.model),
      opt_encoder_(state.opt_encoder),
      opt_decoder_(state.opt_decoder),
      opt_energy_(state.opt_energy),
      opt_discriminator_(state.opt_discriminator),
      iteration_(state.iteration) {
  cfg_.validate();
  if (state.rng_state.empty())
    rng_ = Rng(mix_seed(cfg_.seed, 0x747261696e));
  else
    rng_.deserialize(state.rng_state);
}

TrainerState Trainer::snapshot() const {
  TrainerState s;
  s.config = cfg_;
  s.model = model_;
  s.iteration = iteration_;
  s.opt_encoder = opt_encoder_;
  s.opt_decoder = opt_decoder_;
  s.opt_energy = opt_energy_;
  s.opt_discriminator = opt_discriminator_;
  s.rng_state = rng_.serialize();
  return s;
}

static void apply_update(RoleOptState& opt, NetworkParams& net,
                         const std::vector<Tensor>& grads) {
  if (opt.spec.kind == OptKind::Adam) {
    opt.adam.lr = opt.spec.lr;
    adam_step(opt.adam, net, grads);
  } else {
    sgd_step(net, grads, opt.spec.lr);
  }
}

static double mean_energy(const NetworkParams& energy, const std::vector<Tensor>& codes) {
  Tape t;
  ParamNodes pn = push_params(t, energy, false);
  std::vector<NodeId> es;
  es.reserve(codes.size());
  for (const Tensor& c : codes)
    es.push_back(energy_forward(t, pn, t.constant(c)));
  return t.value(mean_of(t, es)).scalar_value();
}

TrainLogRecord Trainer::step(const std::vector<const PointCloud*>& batch_partial,
                             const std::vector<const PointCloud*>& batch_complete) {
  const auto t_start = std::chrono::steady_clock::now();
  if (batch_partial.empty() || batch_partial.size() != batch_complete.size())
    throw Error("train_step: batches must be non-empty and of equal size");
  const EffectiveWiring wiring = apply_ablation(cfg_);
  const int batch = static_cast<int>(batch_partial.size());
  const int n_points = cfg_.net.n_points;
  const int64_t iter = static_cast<int64_t>(iteration_) + 1;  // 1-based, matches checkpoints

  TrainLogRecord rec;
  rec.iteration = iter;

  Tape ed;
  std::vector<Tensor> transported_vals(batch), complete_code_vals(batch);
  std::vector<Tensor> completed_vals(batch), recon_complete_vals(batch);
  try {
    ParamNodes enc = push_params(ed, model_.encoder, true);
    ParamNodes dec = push_params(ed, model_.decoder, true);
    ParamNodes disc_frozen;
    if (wiring.adversarial_enabled)
      disc_frozen = push_params(ed, model_.discriminator, false);

    std::vector<NodeId> x_nodes(batch), y_nodes(batch), partial_codes(batch),
        complete_codes(batch);
    for (int i = 0; i < batch; ++i) {
      x_nodes[i] = ed.constant(batch_partial[i]->points);
      partial_codes[i] = encoder_forward(ed, enc, x_nodes[i], n_points);
    }
    for (int i = 0; i < batch; ++i) {
      y_nodes[i] = ed.constant(batch_complete[i]->points);
      complete_codes[i] = encoder_forward(ed, enc, y_nodes[i], n_points);
    }

    // Langevin chains run outside this tape; only the finished residual
    // enters the graph, wrapped in stop_gradient.
    std::vector<NodeId> transported(batch);
    const EnergyGradFn energy_fn = make_energy_grad(model_.energy);
    for (int i = 0; i < batch; ++i) {
      if (!wiring.transport_enabled) {
        transported[i] = partial_codes[i];
      } else if (wiring.residual_path) {
        const Residual r =
            langevin_sample_residual(energy_fn, ed.value(partial_codes[i]),
                                     cfg_.langevin, rng_);
        transported[i] = transport(ed, partial_codes[i], r.values);
      } else {
        const Tensor code = langevin_sample_code(
            energy_fn, ed.value(partial_codes[i]), cfg_.langevin, rng_);
        transported[i] = ed.constant(code);  // no gradient back to the encoder
      }
    }

    std::vector<NodeId> completed(batch), recon_complete(batch);
    for (int i = 0; i < batch; ++i)
      completed[i] = decoder_forward(ed, dec, transported[i]);
    for (int i = 0; i < batch; ++i)
      recon_complete[i] = decoder_forward(ed, dec, complete_codes[i]);

    std::vector<NodeId> recon_terms(batch), fidelity_terms(batch);
    for (int i = 0; i < batch; ++i)
      recon_terms[i] = recon_loss(ed, y_nodes[i], recon_complete[i],
                                  cfg_.squared_chamfer);
    for (int i = 0; i < batch; ++i)
      fidelity_terms[i] =
          fidelity_loss(ed, x_nodes[i], completed[i], cfg_.squared_chamfer);
    NodeId recon = mean_of(ed, recon_terms);
    NodeId fidelity = mean_of(ed, fidelity_terms);
    NodeId adv = wiring.adversarial_enabled
                     ? generator_adv_term(ed, disc_frozen,
                                          model_.discriminator.point_layers,
                                          completed, n_points)
                     : ed.constant(Tensor::scalar(0.0));
    LossWeights weights = cfg_.weights;
    weights.adversarial_weight = wiring.adversarial_weight;
    NodeId ed_loss = encoder_decoder_loss(ed, recon, fidelity, adv, weights);

    ed.backward(ed_loss);
    last_ed_tape_nodes_ = ed.node_count();
    rec.recon = ed.value(recon).scalar_value();
    rec.fidelity = ed.value(fidelity).scalar_value();
    rec.adv_gen = ed.value(adv).scalar_value();

    for (int i = 0; i < batch; ++i) {
      transported_vals[i] = ed.value(transported[i]);
      complete_code_vals[i] = ed.value(complete_codes[i]);
      completed_vals[i] = ed.value(completed[i]);
      recon_complete_vals[i] = ed.value(recon_complete[i]);
    }

    apply_update(opt_encoder_, model_.encoder, collect_grads(ed, enc));
    apply_update(opt_decoder_, model_.decoder, collect_grads(ed, dec));
  } catch (const Error& e) {
    throw Error("iteration " + std::to_string(iter) +
                ": encoder-decoder loss failed: " + e.what());
  }

  if (wiring.transport_enabled) {
    try {
      rec.mean_energy_complete = mean_energy(model_.energy, complete_code_vals);
      rec.mean_energy_transported = mean_energy(model_.energy, transported_vals);
      Tape eb;
      ParamNodes energy_nodes = push_params(eb, model_.energy, true);
      NodeId ebm = ebm_surrogate_loss(eb, energy_nodes, transported_vals,
                                      complete_code_vals, cfg_.weights.energy_l2);
      eb.backward(ebm);
      rec.ebm_surrogate = eb.value(ebm).scalar_value();
      apply_update(opt_energy_, model_.energy, collect_grads(eb, energy_nodes));
    } catch (const Error& e) {
      throw Error("iteration " + std::to_string(iter) +
                  ": energy loss failed: " + e.what());
    }
  }

  if (wiring.adversarial_enabled) {
    try {
      Tape td;
      ParamNodes disc_nodes = push_params(td, model_.discriminator, true);
      std::vector<NodeId> real_ids(batch), fake_ids(batch);
      const bool real_from_data = cfg_.adv_real_source == "data";
      for (int i = 0; i < batch; ++i)
        real_ids[i] = td.constant(real_from_data ? batch_complete[i]->points
                                                 : recon_complete_vals[i]);
      for (int i = 0; i < batch; ++i) fake_ids[i] = td.constant(completed_vals[i]);
      NodeId d_loss =
          discriminator_loss(td, disc_nodes, model_.discriminator.point_layers,
                             real_ids, fake_ids, n_points);
      td.backward(d_loss);
      rec.adv_disc = td.value(d_loss).scalar_value();
      apply_update(opt_discriminator_, model_.discriminator,
                   collect_grads(td, disc_nodes));
    } catch (const Error& e) {
      throw Error("iteration " + std::to_string(iter) +
                  ": adversarial loss failed: " + e.what());
    }
  }

  iteration_ += 1;
  rec.wall_ms = std::chrono::duration<double, std::milli>(
                    std::chrono::steady_clock::now() - t_start)
                    .count();
  return rec;
}

std::string log_header() {
  return "iteration\trecon\tfidelity\tadv_disc\tadv_gen\tebm_surrogate\t"
         "mean_energy_complete\tmean_energy_transported";
}

std::string log_line(const TrainLogRecord& r) {
  char buf[320];
  std::snprintf(buf, sizeof(buf),
                "%" PRId64 "\t%.17g\t%.17g\t%.17g\t%.17g\t%.17g\t%.17g\t%.17g",
                r.iteration, r.recon, r.fidelity, r.adv_disc, r.adv_gen,
                r.ebm_surrogate, r.mean_energy_complete, r.mean_energy_transported);
  return buf;
}

static std::string checkpoint_name(uint64_t iter) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "ckpt_%08" PRIu64 ".bin", iter);
  return buf;
}

// Newest numbered checkpoint in dir, or empty string.
static std::string latest_checkpoint(const std::string& dir) {
  std::string best;
  uint64_t best_iter = 0;
  if (!fs::is_directory(dir)) return best;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    uint64_t it = 0;
    if (std::sscanf(name.c_str(), "ckpt_%" SCNu64 ".bin", &it) == 1) {
      if (best.empty() || it >= best_iter) {
        best = entry.path().string();
        best_iter = it;
      }
    }
  }
  return best;
}

RunResult run_training(const TrainConfig& cfg, const DatasetSplit& data,
                       const std::string& out_dir, bool resume, bool quiet) {
  cfg.validate();
  if (data.partial_set.empty() || data.complete_set.empty())
    throw Error("run_training: dataset has an empty training pool");
  if (data.n_points != cfg.net.n_points)
    throw Error("run_training: dataset has " + std::to_string(data.n_points) +
                " points per cloud, config expects " +
                std::to_string(cfg.net.n_points));
  fs::create_directories(out_dir);
  const std::string log_path = (fs::path(out_dir) / "train_log.tsv").string();

  Trainer trainer = [&]() {
    if (resume) {
      const std::string latest = latest_checkpoint(out_dir);
      if (!latest.empty()) {
        TrainerState state = load_checkpoint(latest);
        if (!config_equal_ignoring_iterations(state.config, cfg))
          throw Error("run_training: resume config differs from checkpoint config");
        state.config.iterations = cfg.iterations;
        if (!quiet)
          std::cout << "resuming from " << latest << " at iteration "
                    << state.iteration << "\n";
        return Trainer(state);
      }
    }
    return Trainer(cfg);
  }();

  const bool fresh_log = trainer.iteration() == 0;
  std::ofstream log(log_path, fresh_log ? std::ios::trunc : std::ios::app);
  if (!log) throw Error("run_training: cannot open " + log_path);
  if (fresh_log) log << log_header() << "\n";

  auto write_ckpt = [&](uint64_t iter) {
    save_checkpoint((fs::path(out_dir) / checkpoint_name(iter)).string(),
                    trainer.snapshot());
  };

  if (trainer.iteration() == 0) write_ckpt(0);  // init checkpoint

  const uint64_t total = static_cast<uint64_t>(cfg.iterations);
  const uint64_t report_every = std::max<uint64_t>(1, total / 20);
  while (trainer.iteration() < total) {
    std::vector<const PointCloud*> bx(cfg.batch_size), by(cfg.batch_size);
    for (int i = 0; i < cfg.batch_size; ++i)
      bx[i] = &data.partial_set[trainer.rng().index(data.partial_set.size())].cloud;
    for (int i = 0; i < cfg.batch_size; ++i)
      by[i] = &data.complete_set[trainer.rng().index(data.complete_set.size())].cloud;
    const TrainLogRecord rec = trainer.step(bx, by);
    const uint64_t done = trainer.iteration();
    if (cfg.log_every > 0 && done % static_cast<uint64_t>(cfg.log_every) == 0)
      log << log_line(rec) << "\n";
    if (cfg.checkpoint_every > 0 &&
        done % static_cast<uint64_t>(cfg.checkpoint_every) == 0 && done < total)
      write_ckpt(done);
    if (!quiet && (done % report_every == 0 || done == total))
      std::cout << "iter " << done << "/" << total << "  recon " << rec.recon
                << "  fidelity " << rec.fidelity << "  adv_d " << rec.adv_disc
                << "  (" << rec.wall_ms << " ms)\n";
  }
  write_ckpt(trainer.iteration());
  log.flush();

  RunResult result;
  result.final_checkpoint =
      (fs::path(out_dir) / checkpoint_name(trainer.iteration())).string();
  result.log_path = log_path;
  result.iterations_run = trainer.iteration();
  return result;
}

}  // namespace ltc
