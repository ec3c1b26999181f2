#include "ltc/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "ltc/checkpoint.hpp"
#include "ltc/cloud_io.hpp"
#include "ltc/grad_check.hpp"
#include "ltc/inference.hpp"
#include "ltc/train.hpp"

namespace fs = std::filesystem;

namespace ltc {

namespace {

struct CommonArgs {
  std::string config_path;
  uint64_t seed = 0;
  bool seed_given = false;
};

TrainConfig resolve_config(const std::string& config_path) {
  return config_path.empty() ? TrainConfig{} : load_config(config_path);
}

void echo_config(const TrainConfig& cfg) {
  std::cout << "resolved config:\n" << config_dump(cfg) << "\n";
}

int cmd_gen_data(const std::string& config_path, const std::string& out_dir,
                 uint64_t seed, bool seed_given) {
  TrainConfig cfg = resolve_config(config_path);
  if (seed_given) cfg.dataset.seed = seed;
  cfg.dataset.n_points = cfg.net.n_points;
  echo_config(cfg);
  const DatasetSplit split = build_dataset(cfg.dataset, cfg.dataset.seed);
  save_dataset(split, out_dir);
  std::cout << "wrote " << split.partial_set.size() << " partial, "
            << split.complete_set.size() << " complete, " << split.held_out.size()
            << " held-out pairs to " << out_dir << "\n";
  return 0;
}

int cmd_train(const std::string& config_path, const std::string& data_manifest,
              const std::string& out_dir, bool resume, const CommonArgs& common,
              int iterations_override) {
  TrainConfig cfg = resolve_config(config_path);
  if (common.seed_given) cfg.seed = common.seed;
  if (iterations_override >= 0) cfg.iterations = iterations_override;
  echo_config(cfg);
  const DatasetSplit data = load_dataset(data_manifest);
  const RunResult result = run_training(cfg, data, out_dir, resume);
  std::cout << "final checkpoint: " << result.final_checkpoint << "\n"
            << "training log: " << result.log_path << "\n";
  return 0;
}

LangevinConfig resolve_langevin(const TrainConfig& cfg, int steps_given, int steps,
                                int step_size_given, double step_size) {
  LangevinConfig l = cfg.langevin;
  if (steps_given) l.steps = steps;
  if (step_size_given) l.step_size_sq = step_size;
  return l;
}

int cmd_complete(const std::string& checkpoint_path, const std::string& in_path,
                 const std::string& out_path, uint64_t seed, int steps_given,
                 int steps, int step_size_given, double step_size) {
  const TrainerState state = load_checkpoint(checkpoint_path);
  echo_config(state.config);
  const LangevinConfig langevin =
      resolve_langevin(state.config, steps_given, steps, step_size_given, step_size);
  std::cout << "langevin: steps " << langevin.steps << ", step_size_sq "
            << langevin.step_size_sq << ", seed " << seed << "\n";
  const PointCloud partial = read_cloud(in_path);
  const PointCloud completed =
      complete_shape(state.model, state.config, partial, langevin, seed);
  write_cloud(out_path, completed);
  std::cout << "wrote completion to " << out_path << "\n";
  return 0;
}

int cmd_uncertainty(const std::string& checkpoint_path, const std::string& in_path,
                    const std::string& out_path, int runs, uint64_t seed) {
  const TrainerState state = load_checkpoint(checkpoint_path);
  echo_config(state.config);
  std::cout << "runs " << runs << ", seed " << seed << "\n";
  const PointCloud partial = read_cloud(in_path);
  const UncertaintyMap map = uncertainty_map(state.model, state.config, partial,
                                             state.config.langevin, runs, seed);
  write_cloud_with_scalar(out_path, map.mean_points, map.variance);
  std::cout << "wrote per-point mean + variance to " << out_path << "\n";
  return 0;
}

int cmd_eval(const std::string& checkpoint_path, const std::string& data_manifest,
             const std::string& report_path, uint64_t seed) {
  const TrainerState state = load_checkpoint(checkpoint_path);
  echo_config(state.config);
  const DatasetSplit data = load_dataset(data_manifest);
  const EvalReport report = evaluate(state.model, state.config, data.held_out,
                                     state.config.langevin, seed);
  std::cout << "held-out metrics (lower is better):\n" << eval_summary(report);
  if (!report_path.empty()) {
    std::ofstream out(report_path);
    if (!out) throw Error("eval: cannot write report to " + report_path);
    out << eval_table_tsv(report);
    std::cout << "wrote report table to " << report_path << "\n";
  }
  return 0;
}

int cmd_gradcheck(uint64_t seed, int instances) {
  GradcheckOptions opt;
  opt.seed = seed;
  opt.instances = instances;
  std::cout << "gradcheck: seed " << seed << ", " << instances
            << " instances per check, h " << opt.h << ", tolerance "
            << opt.tolerance << "\n";
  const auto results = run_gradcheck_suite(opt);
  bool all_pass = true;
  double worst = 0.0;
  std::string worst_name;
  for (const auto& r : results) {
    std::cout << (r.pass ? "PASS" : "FAIL") << "  " << r.name
              << "  worst rel err " << r.worst_rel_err << "\n";
    if (r.worst_rel_err >= worst) {
      worst = r.worst_rel_err;
      worst_name = r.name;
    }
    all_pass = all_pass && r.pass;
  }
  std::cout << "worst relative error: " << worst << " (" << worst_name << ")\n";
  return all_pass ? 0 : 2;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"energy-based latent transport for unsupervised point cloud completion"};
  app.require_subcommand(1);

  // gen-data
  auto* gen = app.add_subcommand("gen-data", "generate a synthetic shape dataset");
  std::string gen_config, gen_out;
  uint64_t gen_seed = 0;
  gen->add_option("--config", gen_config, "JSON config file");
  gen->add_option("--out", gen_out, "output directory")->required();
  auto* gen_seed_opt = gen->add_option("--seed", gen_seed, "dataset seed override");

  // train
  auto* train = app.add_subcommand("train", "train a model on a generated dataset");
  std::string train_config, train_data, train_out;
  bool train_resume = false;
  CommonArgs train_common;
  int train_iterations = -1;
  train->add_option("--config", train_config, "JSON config file");
  train->add_option("--data", train_data, "dataset manifest.json")->required();
  train->add_option("--out", train_out, "run directory for checkpoints + log")
      ->required();
  train->add_flag("--resume", train_resume, "continue from the newest checkpoint");
  auto* train_seed_opt = train->add_option("--seed", train_common.seed, "training seed");
  train->add_option("--iterations", train_iterations, "iteration count override");

  // complete
  auto* complete = app.add_subcommand("complete", "complete one partial cloud");
  std::string c_ckpt, c_in, c_out;
  uint64_t c_seed = 0;
  int c_steps = 8;
  double c_step_size = 0.05;
  complete->add_option("--checkpoint", c_ckpt, "trained checkpoint")->required();
  complete->add_option("--in", c_in, "partial cloud .xyz")->required();
  complete->add_option("--out", c_out, "output cloud .xyz")->required();
  complete->add_option("--seed", c_seed, "sampling seed");
  auto* c_steps_opt =
      complete->add_option("--steps", c_steps, "langevin steps (default 8)");
  auto* c_ss_opt = complete->add_option("--step-size", c_step_size,
                                        "langevin squared step size (default 0.05)");

  // uncertainty
  auto* unc = app.add_subcommand("uncertainty", "per-point variance over repeated completions");
  std::string u_ckpt, u_in, u_out;
  int u_runs = 10;
  uint64_t u_seed = 0;
  unc->add_option("--checkpoint", u_ckpt, "trained checkpoint")->required();
  unc->add_option("--in", u_in, "partial cloud .xyz")->required();
  unc->add_option("--out", u_out, "output 4-column .xyz (x y z variance)")->required();
  unc->add_option("--runs", u_runs, "number of completions (>= 2)")
      ->check(CLI::Range(2, 1000000));
  unc->add_option("--seed", u_seed, "sampling seed");

  // eval
  auto* ev = app.add_subcommand("eval", "held-out metrics for a checkpoint");
  std::string e_ckpt, e_data, e_report;
  uint64_t e_seed = 0;
  ev->add_option("--checkpoint", e_ckpt, "trained checkpoint")->required();
  ev->add_option("--data", e_data, "dataset manifest.json")->required();
  ev->add_option("--report", e_report, "write TSV report here");
  ev->add_option("--seed", e_seed, "sampling seed");

  // gradcheck
  auto* gc = app.add_subcommand("gradcheck", "finite-difference gradient suite");
  uint64_t g_seed = 0;
  int g_instances = 100;
  gc->add_option("--seed", g_seed, "suite seed");
  gc->add_option("--instances", g_instances, "instances per check")
      ->check(CLI::Range(1, 100000));

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    std::cout << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  }

  try {
    if (gen->parsed())
      return cmd_gen_data(gen_config, gen_out, gen_seed, gen_seed_opt->count() > 0);
    if (train->parsed()) {
      train_common.seed_given = train_seed_opt->count() > 0;
      return cmd_train(train_config, train_data, train_out, train_resume,
                       train_common, train_iterations);
    }
    if (complete->parsed())
      return cmd_complete(c_ckpt, c_in, c_out, c_seed,
                          static_cast<int>(c_steps_opt->count()), c_steps,
                          static_cast<int>(c_ss_opt->count()), c_step_size);
    if (unc->parsed()) return cmd_uncertainty(u_ckpt, u_in, u_out, u_runs, u_seed);
    if (ev->parsed()) return cmd_eval(e_ckpt, e_data, e_report, e_seed);
    if (gc->parsed()) return cmd_gradcheck(g_seed, g_instances);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  std::cerr << "usage error: no subcommand\n";
  return 1;
}

int run_cli(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run_cli(args);
}

}  // namespace ltc
