#include "ltc/config.hpp"

#include <fstream>

#include <json.hpp>

using nlohmann::json;

namespace ltc {

void TrainConfig::validate() const {
  if (net.n_points < 1 || net.latent_dim < 1) throw Error("config: invalid dims");
  if (langevin.steps < 1) throw Error("config: langevin.steps must be >= 1");
  if (langevin.step_size_sq <= 0.0)
    throw Error("config: langevin.step_size_sq must be > 0");
  if (weights.fidelity_weight < 0.0 || weights.adversarial_weight < 0.0 ||
      weights.energy_l2 < 0.0)
    throw Error("config: loss weights must be nonnegative");
  if (batch_size < 1) throw Error("config: batch_size must be >= 1");
  if (iterations < 0) throw Error("config: iterations must be >= 0");
  if (adv_real_source != "reconstruction" && adv_real_source != "data")
    throw Error("config: adv_real_source must be 'reconstruction' or 'data'");
}

static void check_keys(const json& j, std::initializer_list<const char*> allowed,
                       const std::string& where) {
  for (const auto& item : j.items()) {
    bool ok = false;
    for (const char* k : allowed)
      if (item.key() == k) ok = true;
    if (!ok) throw Error("config: unknown key '" + item.key() + "' in " + where);
  }
}

template <typename T>
static void maybe(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

static void apply_opt(const json& j, OptSpec& o, const std::string& where) {
  check_keys(j, {"kind", "lr"}, where);
  if (j.contains("kind")) o.kind = opt_kind_from_name(j.at("kind").get<std::string>());
  maybe(j, "lr", o.lr);
}

static void apply_json(TrainConfig& cfg, const json& j) {
  check_keys(j,
             {"dims", "net", "langevin", "loss_weights", "optimizers", "batch_size",
              "iterations", "seed", "ablation", "checkpoint_every", "log_every",
              "squared_chamfer", "adv_real_source", "dataset"},
             "top level");
  if (j.contains("dims")) {
    const json& d = j.at("dims");
    check_keys(d, {"n_points", "latent_dim"}, "dims");
    maybe(d, "n_points", cfg.net.n_points);
    maybe(d, "latent_dim", cfg.net.latent_dim);
  }
  if (j.contains("net")) {
    const json& n = j.at("net");
    check_keys(n,
               {"encoder_hidden", "decoder_hidden", "energy_hidden",
                "disc_point_hidden", "disc_head_hidden"},
               "net");
    maybe(n, "encoder_hidden", cfg.net.encoder_hidden);
    maybe(n, "decoder_hidden", cfg.net.decoder_hidden);
    maybe(n, "energy_hidden", cfg.net.energy_hidden);
    maybe(n, "disc_point_hidden", cfg.net.disc_point_hidden);
    maybe(n, "disc_head_hidden", cfg.net.disc_head_hidden);
  }
  if (j.contains("langevin")) {
    const json& l = j.at("langevin");
    check_keys(l, {"steps", "step_size_sq", "noise_scale"}, "langevin");
    maybe(l, "steps", cfg.langevin.steps);
    maybe(l, "step_size_sq", cfg.langevin.step_size_sq);
    maybe(l, "noise_scale", cfg.langevin.noise_scale);
  }
  if (j.contains("loss_weights")) {
    const json& w = j.at("loss_weights");
    check_keys(w, {"fidelity", "adversarial", "energy_l2"}, "loss_weights");
    maybe(w, "fidelity", cfg.weights.fidelity_weight);
    maybe(w, "adversarial", cfg.weights.adversarial_weight);
    maybe(w, "energy_l2", cfg.weights.energy_l2);
  }
  if (j.contains("optimizers")) {
    const json& o = j.at("optimizers");
    check_keys(o, {"encoder", "decoder", "energy", "discriminator"}, "optimizers");
    if (o.contains("encoder")) apply_opt(o.at("encoder"), cfg.opt_encoder, "optimizers.encoder");
    if (o.contains("decoder")) apply_opt(o.at("decoder"), cfg.opt_decoder, "optimizers.decoder");
    if (o.contains("energy")) apply_opt(o.at("energy"), cfg.opt_energy, "optimizers.energy");
    if (o.contains("discriminator"))
      apply_opt(o.at("discriminator"), cfg.opt_discriminator, "optimizers.discriminator");
  }
  maybe(j, "batch_size", cfg.batch_size);
  maybe(j, "iterations", cfg.iterations);
  maybe(j, "seed", cfg.seed);
  if (j.contains("ablation")) {
    const json& a = j.at("ablation");
    check_keys(a,
               {"disable_eb_transport", "disable_residual_sampling",
                "disable_adversarial"},
               "ablation");
    maybe(a, "disable_eb_transport", cfg.disable_eb_transport);
    maybe(a, "disable_residual_sampling", cfg.disable_residual_sampling);
    maybe(a, "disable_adversarial", cfg.disable_adversarial);
  }
  maybe(j, "checkpoint_every", cfg.checkpoint_every);
  maybe(j, "log_every", cfg.log_every);
  maybe(j, "squared_chamfer", cfg.squared_chamfer);
  maybe(j, "adv_real_source", cfg.adv_real_source);
  if (j.contains("dataset")) {
    const json& d = j.at("dataset");
    check_keys(d,
               {"families", "partial_per_family", "complete_per_family",
                "held_out_per_family", "keep_fraction_min", "keep_fraction_max",
                "seed"},
               "dataset");
    if (d.contains("families")) {
      cfg.dataset.families.clear();
      for (const auto& f : d.at("families"))
        cfg.dataset.families.push_back(family_from_name(f.get<std::string>()));
    }
    maybe(d, "partial_per_family", cfg.dataset.partial_per_family);
    maybe(d, "complete_per_family", cfg.dataset.complete_per_family);
    maybe(d, "held_out_per_family", cfg.dataset.held_out_per_family);
    maybe(d, "keep_fraction_min", cfg.dataset.keep_fraction_min);
    maybe(d, "keep_fraction_max", cfg.dataset.keep_fraction_max);
    maybe(d, "seed", cfg.dataset.seed);
  }
  cfg.dataset.n_points = cfg.net.n_points;
  cfg.validate();
}

void apply_config_text(TrainConfig& cfg, const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(std::string("config: parse error: ") + e.what());
  }
  apply_json(cfg, j);
}

TrainConfig config_from_json_text(const std::string& text) {
  TrainConfig cfg;
  apply_config_text(cfg, text);
  return cfg;
}

TrainConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("config: cannot open " + path);
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return config_from_json_text(text);
}

static json opt_json(const OptSpec& o) {
  return {{"kind", opt_kind_name(o.kind)}, {"lr", o.lr}};
}

std::string config_dump(const TrainConfig& cfg) {
  json j;
  j["dims"] = {{"n_points", cfg.net.n_points}, {"latent_dim", cfg.net.latent_dim}};
  j["net"] = {{"encoder_hidden", cfg.net.encoder_hidden},
              {"decoder_hidden", cfg.net.decoder_hidden},
              {"energy_hidden", cfg.net.energy_hidden},
              {"disc_point_hidden", cfg.net.disc_point_hidden},
              {"disc_head_hidden", cfg.net.disc_head_hidden}};
  j["langevin"] = {{"steps", cfg.langevin.steps},
                   {"step_size_sq", cfg.langevin.step_size_sq},
                   {"noise_scale", cfg.langevin.noise_scale}};
  j["loss_weights"] = {{"fidelity", cfg.weights.fidelity_weight},
                       {"adversarial", cfg.weights.adversarial_weight},
                       {"energy_l2", cfg.weights.energy_l2}};
  j["optimizers"] = {{"encoder", opt_json(cfg.opt_encoder)},
                     {"decoder", opt_json(cfg.opt_decoder)},
                     {"energy", opt_json(cfg.opt_energy)},
                     {"discriminator", opt_json(cfg.opt_discriminator)}};
  j["batch_size"] = cfg.batch_size;
  j["iterations"] = cfg.iterations;
  j["seed"] = cfg.seed;
  j["ablation"] = {{"disable_eb_transport", cfg.disable_eb_transport},
                   {"disable_residual_sampling", cfg.disable_residual_sampling},
                   {"disable_adversarial", cfg.disable_adversarial}};
  j["checkpoint_every"] = cfg.checkpoint_every;
  j["log_every"] = cfg.log_every;
  j["squared_chamfer"] = cfg.squared_chamfer;
  j["adv_real_source"] = cfg.adv_real_source;
  json families = json::array();
  for (ShapeFamily f : cfg.dataset.families) families.push_back(family_name(f));
  j["dataset"] = {{"families", families},
                  {"partial_per_family", cfg.dataset.partial_per_family},
                  {"complete_per_family", cfg.dataset.complete_per_family},
                  {"held_out_per_family", cfg.dataset.held_out_per_family},
                  {"keep_fraction_min", cfg.dataset.keep_fraction_min},
                  {"keep_fraction_max", cfg.dataset.keep_fraction_max},
                  {"seed", cfg.dataset.seed}};
  return j.dump(2);
}

bool config_equal_ignoring_iterations(const TrainConfig& a, const TrainConfig& b) {
  TrainConfig a2 = a, b2 = b;
  a2.iterations = b2.iterations = 0;
  return config_dump(a2) == config_dump(b2);
}

}  // namespace ltc
