#include "ltc/inference.hpp"

#include <cmath>
#include <cstdio>
#include <map>

#include "ltc/train.hpp"
#include "ltc/transport.hpp"

namespace ltc {

PointCloud complete_shape(const ModelParams& model, const TrainConfig& cfg,
                          const PointCloud& partial, const LangevinConfig& langevin,
                          uint64_t seed) {
  if (partial.size() != cfg.net.n_points)
    throw Error("complete_shape: cloud has " + std::to_string(partial.size()) +
                " points, checkpoint expects " + std::to_string(cfg.net.n_points));
  const EffectiveWiring wiring = apply_ablation(cfg);
  Rng rng(mix_seed(seed, 0x636f6d70));

  Tape tape;
  ParamNodes enc = push_params(tape, model.encoder, false);
  ParamNodes dec = push_params(tape, model.decoder, false);
  NodeId x = tape.constant(partial.points);
  NodeId partial_code = encoder_forward(tape, enc, x, cfg.net.n_points);

  NodeId transported;
  if (!wiring.transport_enabled) {
    transported = partial_code;
  } else if (wiring.residual_path) {
    const Residual r = langevin_sample_residual(
        make_energy_grad(model.energy), tape.value(partial_code), langevin, rng);
    transported = transport(tape, partial_code, r.values);
  } else {
    transported = tape.constant(langevin_sample_code(
        make_energy_grad(model.energy), tape.value(partial_code), langevin, rng));
  }
  NodeId completed = decoder_forward(tape, dec, transported);
  return PointCloud(tape.value(completed));
}

UncertaintyMap uncertainty_map(const ModelParams& model, const TrainConfig& cfg,
                               const PointCloud& partial,
                               const LangevinConfig& langevin, int runs,
                               uint64_t seed) {
  if (runs < 2) throw Error("uncertainty_map: needs at least 2 runs");
  const int n = cfg.net.n_points;
  std::vector<PointCloud> clouds;
  clouds.reserve(runs);
  for (int r = 0; r < runs; ++r)
    clouds.push_back(
        complete_shape(model, cfg, partial, langevin, mix_seed(seed, r)));

  UncertaintyMap map;
  map.num_runs = runs;
  Tensor mean = Tensor::zeros({n, 3});
  map.variance.assign(n, 0.0);
  // Deviations are taken against the first run (shifted form), so
  // identical runs yield an exact zero variance.
  const Tensor& base = clouds[0].points;
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < 3; ++k) {
      const size_t idx = 3 * static_cast<size_t>(i) + k;
      double s1 = 0.0, s2 = 0.0;
      for (const PointCloud& c : clouds) {
        const double d = c.points.data[idx] - base.data[idx];
        s1 += d;
        s2 += d * d;
      }
      mean.data[idx] = base.data[idx] + s1 / runs;
      const double var_k = (s2 - s1 * s1 / runs) / (runs - 1);
      if (var_k > 0.0) map.variance[i] += var_k;
    }
  }
  map.mean_points = PointCloud(std::move(mean));
  return map;
}

EvalReport evaluate(const ModelParams& model, const TrainConfig& cfg,
                    const std::vector<HeldOutPair>& pairs,
                    const LangevinConfig& langevin, uint64_t seed) {
  return evaluate_with(
      [&](const HeldOutPair& pair, size_t i) {
        return complete_shape(model, cfg, pair.partial, langevin, mix_seed(seed, i));
      },
      pairs);
}

EvalReport evaluate_with(const CompletionFn& complete_fn,
                         const std::vector<HeldOutPair>& pairs) {
  if (pairs.empty()) throw Error("evaluate: empty evaluation set");
  struct Acc {
    int count = 0;
    double cd = 0.0, ucd = 0.0, baseline = 0.0;
  };
  std::map<std::string, Acc> by_family;
  Acc total;
  for (size_t i = 0; i < pairs.size(); ++i) {
    const HeldOutPair& pair = pairs[i];
    const PointCloud completed = complete_fn(pair, i);
    const double cd = chamfer_distance(completed, pair.complete);
    const double ucd = unidirectional_chamfer(pair.partial, completed);
    const double baseline = chamfer_distance(pair.partial, pair.complete);
    Acc& acc = by_family[family_name(pair.family)];
    acc.count += 1;
    acc.cd += cd;
    acc.ucd += ucd;
    acc.baseline += baseline;
    total.count += 1;
    total.cd += cd;
    total.ucd += ucd;
    total.baseline += baseline;
  }

  auto to_row = [](const std::string& name, const Acc& a) {
    EvalRow row;
    row.family = name;
    row.count = a.count;
    row.cd_x1e4 = 1e4 * a.cd / a.count;
    row.ucd_x1e4 = 1e4 * a.ucd / a.count;
    row.baseline_cd_x1e4 = 1e4 * a.baseline / a.count;
    return row;
  };
  EvalReport report;
  for (const auto& [name, acc] : by_family)
    report.per_family.push_back(to_row(name, acc));
  report.average = to_row("average", total);
  return report;
}

std::string eval_table_tsv(const EvalReport& report) {
  std::string out = "family\tcount\tcd_x1e4\tucd_x1e4\tbaseline_cd_x1e4\n";
  char buf[192];
  auto add = [&](const EvalRow& r) {
    std::snprintf(buf, sizeof(buf), "%s\t%d\t%.6f\t%.6f\t%.6f\n", r.family.c_str(),
                  r.count, r.cd_x1e4, r.ucd_x1e4, r.baseline_cd_x1e4);
    out += buf;
  };
  for (const EvalRow& r : report.per_family) add(r);
  add(report.average);
  return out;
}

std::string eval_summary(const EvalReport& report) {
  std::string out;
  char buf[192];
  for (const EvalRow& r : report.per_family) {
    std::snprintf(buf, sizeof(buf),
                  "  %-10s  CD x 10^4: %8.2f   UCD x 10^4: %8.2f   baseline CD x 10^4: %8.2f\n",
                  r.family.c_str(), r.cd_x1e4, r.ucd_x1e4, r.baseline_cd_x1e4);
    out += buf;
  }
  std::snprintf(buf, sizeof(buf),
                "  %-10s  CD x 10^4: %8.2f   UCD x 10^4: %8.2f   baseline CD x 10^4: %8.2f\n",
                "average", report.average.cd_x1e4, report.average.ucd_x1e4,
                report.average.baseline_cd_x1e4);
  out += buf;
  return out;
}

}  // namespace ltc
