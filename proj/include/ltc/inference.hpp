#pragma once

#include <functional>
#include <string>
#include <vector>

#include "ltc/config.hpp"
#include "ltc/metrics.hpp"
#include "ltc/synth.hpp"

namespace ltc {

// Test-time completion: encode the partial cloud, transport its code with a
// fresh Langevin chain (honoring the checkpoint's ablation wiring), decode.
// Stochastic across seeds, deterministic per seed.
PointCloud complete_shape(const ModelParams& model, const TrainConfig& cfg,
                          const PointCloud& partial, const LangevinConfig& langevin,
                          uint64_t seed);

// Spread of repeated stochastic completions. Mean and variance are computed
// per point index across runs (decoded points have stable indices), with
// variance the trace of the per-index coordinate covariance.
struct UncertaintyMap {
  PointCloud mean_points;
  std::vector<double> variance;
  int num_runs = 0;
};

UncertaintyMap uncertainty_map(const ModelParams& model, const TrainConfig& cfg,
                               const PointCloud& partial,
                               const LangevinConfig& langevin, int runs,
                               uint64_t seed);

struct EvalRow {
  std::string family;
  int count = 0;
  double cd_x1e4 = 0.0;           // completion vs ground truth, scaled by 1e4
  double ucd_x1e4 = 0.0;          // partial vs completion, scaled by 1e4
  double baseline_cd_x1e4 = 0.0;  // partial vs ground truth, scaled by 1e4
};

struct EvalReport {
  std::vector<EvalRow> per_family;
  EvalRow average;
};

// Held-out metrics in the CD x 1e4 / UCD x 1e4 convention, per family plus
// the average row; the baseline column scores the partial input itself.
EvalReport evaluate(const ModelParams& model, const TrainConfig& cfg,
                    const std::vector<HeldOutPair>& pairs,
                    const LangevinConfig& langevin, uint64_t seed);

// Same aggregation with an arbitrary completion source (index = position in
// `pairs`); evaluate() routes through this.
using CompletionFn = std::function<PointCloud(const HeldOutPair&, size_t)>;
EvalReport evaluate_with(const CompletionFn& complete_fn,
                         const std::vector<HeldOutPair>& pairs);

std::string eval_table_tsv(const EvalReport& report);
std::string eval_summary(const EvalReport& report);

}  // namespace ltc
