#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "ltc/inference.hpp"
#include "ltc/train.hpp"

using namespace ltc;

namespace {

TrainConfig micro_config() {
  TrainConfig cfg;
  cfg.net.n_points = 32;
  cfg.net.latent_dim = 8;
  cfg.net.encoder_hidden = {12, 16};
  cfg.net.decoder_hidden = {16, 24};
  cfg.net.energy_hidden = {12, 12};
  cfg.net.disc_point_hidden = {12, 16};
  cfg.net.disc_head_hidden = {8};
  cfg.batch_size = 4;
  cfg.iterations = 20;
  cfg.dataset.families = {ShapeFamily::Sphere, ShapeFamily::Cuboid};
  cfg.dataset.partial_per_family = 4;
  cfg.dataset.complete_per_family = 4;
  cfg.dataset.held_out_per_family = 2;
  cfg.dataset.n_points = cfg.net.n_points;
  return cfg;
}

// A briefly trained micro model shared by the stochasticity tests.
struct Fixture {
  TrainConfig cfg;
  DatasetSplit data;
  ModelParams model;

  Fixture() : cfg(micro_config()), data(build_dataset(cfg.dataset, 0)) {
    Trainer trainer(cfg);
    for (int k = 0; k < 20; ++k) {
      std::vector<const PointCloud*> bx, by;
      for (int i = 0; i < cfg.batch_size; ++i) {
        bx.push_back(&data.partial_set[trainer.rng().index(data.partial_set.size())].cloud);
        by.push_back(&data.complete_set[trainer.rng().index(data.complete_set.size())].cloud);
      }
      trainer.step(bx, by);
    }
    model = trainer.model();
  }
};

const Fixture& fixture() {
  static Fixture f;
  return f;
}

}  // namespace

TEST_CASE("completion is deterministic per seed, stochastic across seeds") {
  const auto& f = fixture();
  const PointCloud& x = f.data.held_out[0].partial;
  const PointCloud a = complete_shape(f.model, f.cfg, x, f.cfg.langevin, 5);
  const PointCloud b = complete_shape(f.model, f.cfg, x, f.cfg.langevin, 5);
  const PointCloud c = complete_shape(f.model, f.cfg, x, f.cfg.langevin, 6);
  CHECK(a.points.data == b.points.data);
  CHECK(a.points.data != c.points.data);
  CHECK(a.size() == f.cfg.net.n_points);
}

TEST_CASE("identity transport checkpoint completes deterministically as decode(encode(x))") {
  const auto& f = fixture();
  TrainConfig cfg = f.cfg;
  cfg.disable_eb_transport = true;
  const PointCloud& x = f.data.held_out[1].partial;
  const PointCloud a = complete_shape(f.model, cfg, x, cfg.langevin, 1);
  const PointCloud b = complete_shape(f.model, cfg, x, cfg.langevin, 999);
  CHECK(a.points.data == b.points.data);

  Tape t;
  auto enc = push_params(t, f.model.encoder, false);
  auto dec = push_params(t, f.model.decoder, false);
  auto code = encoder_forward(t, enc, t.constant(x.points), cfg.net.n_points);
  auto out = decoder_forward(t, dec, code);
  CHECK(a.points.data == t.value(out).data);
}

TEST_CASE("wrong point count is rejected against the checkpoint dims") {
  const auto& f = fixture();
  const PointCloud small = PointCloud(Tensor::zeros({8, 3}));
  CHECK_THROWS_AS(complete_shape(f.model, f.cfg, small, f.cfg.langevin, 0), Error);
}

TEST_CASE("uncertainty map needs at least two runs") {
  const auto& f = fixture();
  CHECK_THROWS_AS(
      uncertainty_map(f.model, f.cfg, f.data.held_out[0].partial, f.cfg.langevin, 1, 0),
      Error);
}

TEST_CASE("deterministic chains give an exactly zero uncertainty map") {
  const auto& f = fixture();
  LangevinConfig frozen = f.cfg.langevin;
  frozen.noise_scale = 0.0;
  const UncertaintyMap map =
      uncertainty_map(f.model, f.cfg, f.data.held_out[0].partial, frozen, 6, 3);
  CHECK(map.num_runs == 6);
  for (double v : map.variance) CHECK(v == 0.0);
}

TEST_CASE("uncertainty statistics are nonnegative and permutation invariant") {
  const auto& f = fixture();
  const PointCloud& x = f.data.held_out[0].partial;
  const int runs = 5;
  const uint64_t seed = 17;
  const UncertaintyMap map = uncertainty_map(f.model, f.cfg, x, f.cfg.langevin, runs, seed);
  for (double v : map.variance) CHECK(v >= 0.0);

  // recompute from the same completions in reversed order
  std::vector<PointCloud> clouds;
  for (int r = runs - 1; r >= 0; --r)
    clouds.push_back(complete_shape(f.model, f.cfg, x, f.cfg.langevin, mix_seed(seed, r)));
  const int n = f.cfg.net.n_points;
  for (int i = 0; i < n; ++i) {
    double mean[3] = {0, 0, 0};
    for (const auto& c : clouds)
      for (int k = 0; k < 3; ++k) mean[k] += c.points.data[3 * i + k];
    for (double& m : mean) m /= runs;
    double var = 0.0;
    for (const auto& c : clouds)
      for (int k = 0; k < 3; ++k) {
        const double d = c.points.data[3 * i + k] - mean[k];
        var += d * d;
      }
    var /= (runs - 1);
    CHECK(map.variance[i] == doctest::Approx(var).epsilon(1e-9));
  }
}

TEST_CASE("oracle completions score zero CD; identity scores zero UCD") {
  const auto& f = fixture();
  const auto& pairs = f.data.held_out;

  const EvalReport oracle = evaluate_with(
      [](const HeldOutPair& p, size_t) { return p.complete; }, pairs);
  CHECK(oracle.average.cd_x1e4 == 0.0);

  const EvalReport identity = evaluate_with(
      [](const HeldOutPair& p, size_t) { return p.partial; }, pairs);
  CHECK(identity.average.ucd_x1e4 == 0.0);
  CHECK(identity.average.cd_x1e4 ==
        doctest::Approx(identity.average.baseline_cd_x1e4).epsilon(1e-12));
}

TEST_CASE("evaluate reports the x1e4 scaling per family plus an average row") {
  const PointCloud a = PointCloud::from_rows({{0.0, 0.0, 0.0}});
  const PointCloud b = PointCloud::from_rows({{1.0, 0.0, 0.0}});
  HeldOutPair pair;
  pair.partial = a;
  pair.complete = b;
  pair.family = ShapeFamily::Sphere;
  pair.view_dir = {0, 0, 1};
  pair.keep_fraction = 0.5;
  const EvalReport rep = evaluate_with(
      [&a](const HeldOutPair&, size_t) { return a; }, {pair});
  REQUIRE(rep.per_family.size() == 1);
  CHECK(rep.per_family[0].family == "sphere");
  CHECK(rep.per_family[0].cd_x1e4 == doctest::Approx(2e4).epsilon(1e-12));
  CHECK(rep.average.baseline_cd_x1e4 == doctest::Approx(2e4).epsilon(1e-12));

  const std::string tsv = eval_table_tsv(rep);
  CHECK(tsv.find("cd_x1e4") != std::string::npos);
  CHECK(tsv.find("sphere") != std::string::npos);
  CHECK(tsv.find("average") != std::string::npos);

  CHECK_THROWS_AS(evaluate_with([&a](const HeldOutPair&, size_t) { return a; }, {}),
                  Error);
}

TEST_CASE("evaluate with the real model runs end to end") {
  const auto& f = fixture();
  const EvalReport rep =
      evaluate(f.model, f.cfg, f.data.held_out, f.cfg.langevin, 0);
  CHECK(rep.average.count == static_cast<int>(f.data.held_out.size()));
  CHECK(rep.average.cd_x1e4 > 0.0);
  CHECK(rep.average.baseline_cd_x1e4 > 0.0);
  CHECK(std::isfinite(rep.average.ucd_x1e4));
}
