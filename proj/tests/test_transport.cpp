#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "ltc/networks.hpp"
#include "ltc/rng.hpp"
#include "ltc/transport.hpp"

using namespace ltc;

namespace {

NetConfig small_config() {
  NetConfig cfg;
  cfg.n_points = 12;
  cfg.latent_dim = 6;
  cfg.encoder_hidden = {8, 10};
  cfg.decoder_hidden = {10, 12};
  cfg.energy_hidden = {8, 8};
  return cfg;
}

// Analytic quadratic: E(c) = 0.5 * ||c - mu||^2, grad = c - mu.
EnergyGradFn quadratic_energy(const Tensor& mu) {
  return [mu](const Tensor& code, Tensor& grad) {
    grad = Tensor::zeros(code.shape);
    double e = 0.0;
    for (size_t i = 0; i < code.data.size(); ++i) {
      const double d = code.data[i] - mu.data[i];
      grad.data[i] = d;
      e += 0.5 * d * d;
    }
    return e;
  };
}

EnergyGradFn zero_energy() {
  return [](const Tensor& code, Tensor& grad) {
    grad = Tensor::zeros(code.shape);
    return 0.0;
  };
}

}  // namespace

TEST_CASE("zero energy gives a pure gaussian random walk with variance K*dd") {
  const int d = 8;
  const int chains = 2000;
  LangevinConfig cfg;
  cfg.steps = 8;
  cfg.step_size_sq = 0.05;
  const Tensor origin = Tensor::zeros({d});

  Rng rng(101);
  std::vector<double> finals;
  finals.reserve(static_cast<size_t>(chains) * d);
  for (int c = 0; c < chains; ++c) {
    const Residual r = langevin_sample_residual(zero_energy(), origin, cfg, rng);
    finals.insert(finals.end(), r.values.data.begin(), r.values.data.end());
  }
  double mean = 0.0;
  for (double v : finals) mean += v;
  mean /= finals.size();
  double var = 0.0;
  for (double v : finals) var += (v - mean) * (v - mean);
  var /= (finals.size() - 1);

  const double expected_var = cfg.steps * cfg.step_size_sq;  // 0.4
  const double n = static_cast<double>(finals.size());
  const double se_mean = std::sqrt(expected_var / n);
  const double se_var = expected_var * std::sqrt(2.0 / (n - 1));
  CHECK(std::abs(mean) < 3.0 * se_mean);
  CHECK(std::abs(var - expected_var) < 3.0 * se_var);
}

TEST_CASE("zero-final-layer energy net behaves as zero energy") {
  const NetConfig net_cfg = small_config();
  ModelParams m = init_params(net_cfg, 3);
  auto& last = m.energy.layers.back();
  std::fill(last.weight.data.begin(), last.weight.data.end(), 0.0);
  std::fill(last.bias.data.begin(), last.bias.data.end(), 0.0);

  LangevinConfig cfg;
  Rng rng_net(5), rng_free(5);
  Tensor code = Tensor::zeros({net_cfg.latent_dim});
  for (size_t i = 0; i < code.data.size(); ++i) code.data[i] = 0.3 * (i + 1);
  const Residual via_net =
      langevin_sample_residual(make_energy_grad(m.energy), code, cfg, rng_net);
  const Residual via_zero = langevin_sample_residual(zero_energy(), code, cfg, rng_free);
  CHECK(via_net.values.data == via_zero.values.data);
}

TEST_CASE("quadratic energy chain approaches the stationary gaussian") {
  const int d = 4;
  Tensor mu = Tensor::zeros({d});
  for (int i = 0; i < d; ++i) mu.data[i] = 0.5 * (i + 1);
  LangevinConfig cfg;
  cfg.steps = 2000;
  cfg.step_size_sq = 0.01;
  const Tensor origin = Tensor::zeros({d});
  const auto energy = quadratic_energy(mu);

  const int chains = 1500;
  Rng rng(202);
  std::vector<std::vector<double>> finals(d);
  for (int c = 0; c < chains; ++c) {
    const Residual r = langevin_sample_residual(energy, origin, cfg, rng);
    for (int i = 0; i < d; ++i) finals[i].push_back(r.values.data[i]);
  }
  for (int i = 0; i < d; ++i) {
    double mean = 0.0;
    for (double v : finals[i]) mean += v;
    mean /= chains;
    double var = 0.0;
    for (double v : finals[i]) var += (v - mean) * (v - mean);
    var /= (chains - 1);
    CHECK(std::abs(mean - mu.data[i]) < 0.05);
    CHECK(var > 0.8);
    CHECK(var < 1.2);
  }
}

TEST_CASE("noise_scale 0 is deterministic descent with non-increasing energy") {
  const int d = 5;
  Tensor mu = Tensor::full({d}, 1.0);
  LangevinConfig cfg;
  cfg.steps = 50;
  cfg.step_size_sq = 0.5;  // any value below 2 contracts on this quadratic
  cfg.noise_scale = 0.0;

  std::vector<double> energies;
  const auto base = quadratic_energy(mu);
  EnergyGradFn recording = [&](const Tensor& code, Tensor& grad) {
    const double e = base(code, grad);
    energies.push_back(e);
    return e;
  };
  Rng rng(7);
  const Tensor origin = Tensor::zeros({d});
  const Residual r1 = langevin_sample_residual(recording, origin, cfg, rng);
  Tensor dummy;
  energies.push_back(base(r1.values, dummy));
  for (size_t i = 1; i < energies.size(); ++i) CHECK(energies[i] <= energies[i - 1]);

  Rng rng2(99);  // noise-free chains ignore the rng stream
  const Residual r2 = langevin_sample_residual(base, origin, cfg, rng2);
  for (int i = 0; i < d; ++i)
    CHECK(r2.values.data[i] == doctest::Approx(mu.data[i]).epsilon(1e-6));
}

TEST_CASE("chains are bit-reproducible for a fixed seed") {
  const NetConfig net_cfg = small_config();
  const ModelParams m = init_params(net_cfg, 11);
  Tensor code = Tensor::zeros({net_cfg.latent_dim});
  for (size_t i = 0; i < code.data.size(); ++i) code.data[i] = 0.1 * (i + 1);
  LangevinConfig cfg;
  Rng a(31), b(31), c(32);
  const auto efn = make_energy_grad(m.energy);
  const Residual ra = langevin_sample_residual(efn, code, cfg, a);
  const Residual rb = langevin_sample_residual(efn, code, cfg, b);
  const Residual rc = langevin_sample_residual(efn, code, cfg, c);
  CHECK(ra.values.data == rb.values.data);
  CHECK(ra.values.data != rc.values.data);
}

TEST_CASE("mid-chain non-finite energy reports the step index") {
  int call = 0;
  EnergyGradFn exploding = [&call](const Tensor& code, Tensor& grad) {
    grad = Tensor::zeros(code.shape);
    return call++ == 3 ? std::numeric_limits<double>::infinity() : 0.0;
  };
  LangevinConfig cfg;
  cfg.steps = 8;
  Rng rng(1);
  const Tensor origin = Tensor::zeros({3});
  CHECK_THROWS_WITH_AS(langevin_sample_residual(exploding, origin, cfg, rng),
                       doctest::Contains("step 3"), Error);
}

TEST_CASE("langevin config is validated") {
  Rng rng(1);
  const Tensor origin = Tensor::zeros({2});
  LangevinConfig bad_steps;
  bad_steps.steps = 0;
  CHECK_THROWS_AS(langevin_sample_residual(zero_energy(), origin, bad_steps, rng),
                  Error);
  LangevinConfig bad_step_size;
  bad_step_size.step_size_sq = 0.0;
  CHECK_THROWS_AS(langevin_sample_residual(zero_energy(), origin, bad_step_size, rng),
                  Error);
}

TEST_CASE("transport with zero residual is the identity") {
  Tape t;
  auto code = t.param(Tensor::vec({1.0, -2.0, 3.0}));
  auto moved = transport(t, code, Tensor::zeros({3}));
  CHECK(t.value(moved).data == t.value(code).data);
  CHECK_THROWS_AS(transport(t, code, Tensor::zeros({4})), Error);
}

TEST_CASE("transport passes identity jacobian to the code, zero to the residual") {
  Tape t;
  auto code = t.param(Tensor::vec({0.5, -0.5}));
  auto moved = transport(t, code, Tensor::vec({10.0, 20.0}));
  t.backward(t.reduce_sum(t.square(moved)));
  // d/dz of sum((z + r)^2) with r constant: 2 (z + r)
  CHECK(t.grad(code).data == std::vector<double>{2.0 * 10.5, 2.0 * 19.5});
}

TEST_CASE("encoder gradient through transport equals the constant-residual path bitwise") {
  const NetConfig cfg = small_config();
  const ModelParams m = init_params(cfg, 21);
  Rng rng(22);
  Tensor cloud = Tensor::zeros({cfg.n_points, 3});
  for (double& v : cloud.data) v = rng.uniform(-0.5, 0.5);
  Tensor residual = Tensor::zeros({cfg.latent_dim});
  for (double& v : residual.data) v = rng.uniform(-0.4, 0.4);

  auto run = [&](bool with_stop_grad) {
    Tape t;
    ParamNodes enc = push_params(t, m.encoder, true);
    auto code = encoder_forward(t, enc, t.constant(cloud), cfg.n_points);
    auto moved = with_stop_grad
                     ? transport(t, code, residual)
                     : t.add(code, t.constant(residual));
    t.backward(t.reduce_sum(t.square(moved)));
    std::vector<double> flat;
    for (const Tensor& g : collect_grads(t, enc))
      flat.insert(flat.end(), g.data.begin(), g.data.end());
    return flat;
  };
  CHECK(run(true) == run(false));
}

TEST_CASE("surrogate loss hand value on singleton batches") {
  // Linear energy E(z) = w . z with w = e0 makes E(z_complete) = 1 and
  // E(z_transported) = 2: loss = 1 - 2 + 0.1 * (1 + 4) = -0.5.
  NetworkParams energy;
  energy.role = Role::Energy;
  DenseLayer l;
  l.name = "ebm.fc1";
  l.weight = Tensor({2, 1}, {1.0, 0.0});
  l.bias = Tensor::zeros({1});
  energy.layers.push_back(l);

  Tape t;
  auto loss = ebm_surrogate_loss(t, push_params(t, energy, true),
                                 {Tensor::vec({2.0, 0.0})}, {Tensor::vec({1.0, 0.0})},
                                 0.1);
  CHECK(t.value(loss).data[0] == -0.5);
  CHECK_THROWS_AS(ebm_surrogate_loss(t, push_params(t, energy, true), {}, {}, 0.1),
                  Error);
}

TEST_CASE("identical batches leave only the regularizer") {
  const NetConfig cfg = small_config();
  const ModelParams m = init_params(cfg, 33);
  Rng rng(34);
  std::vector<Tensor> batch;
  for (int i = 0; i < 4; ++i) {
    Tensor z = Tensor::zeros({cfg.latent_dim});
    for (double& v : z.data) v = rng.uniform(-1.0, 1.0);
    batch.push_back(z);
  }
  Tape t;
  auto pn = push_params(t, m.energy, true);
  auto loss = ebm_surrogate_loss(t, pn, batch, batch, 0.1);

  std::vector<NodeId> sq;
  for (const Tensor& z : batch)
    sq.push_back(t.square(energy_forward(t, pn, t.constant(z))));
  auto mean_sq = t.scalar_mul(mean_of(t, sq), 2.0 * 0.1);
  CHECK(t.value(loss).data[0] == doctest::Approx(t.value(mean_sq).data[0]).epsilon(1e-14));
}

TEST_CASE("one descent step lowers energy on data codes and raises it on samples") {
  const NetConfig cfg = small_config();
  ModelParams m = init_params(cfg, 44);
  Rng rng(45);
  std::vector<Tensor> transported, complete;
  for (int i = 0; i < 6; ++i) {
    Tensor a = Tensor::zeros({cfg.latent_dim}), b = Tensor::zeros({cfg.latent_dim});
    for (double& v : a.data) v = rng.uniform(-1.0, 1.0);
    for (double& v : b.data) v = rng.uniform(-1.0, 1.0);
    transported.push_back(a);
    complete.push_back(b);
  }
  auto mean_e = [&](const std::vector<Tensor>& codes) {
    Tape t;
    auto pn = push_params(t, m.energy, false);
    std::vector<NodeId> es;
    for (const Tensor& z : codes) es.push_back(energy_forward(t, pn, t.constant(z)));
    return t.value(mean_of(t, es)).data[0];
  };
  const double before_complete = mean_e(complete);
  const double before_transported = mean_e(transported);

  Tape t;
  auto pn = push_params(t, m.energy, true);
  auto loss = ebm_surrogate_loss(t, pn, transported, complete, 0.0);
  t.backward(loss);
  const auto grads = collect_grads(t, pn);
  for (size_t i = 0; i < m.energy.layers.size(); ++i) {
    auto& layer = m.energy.layers[i];
    for (size_t j = 0; j < layer.weight.data.size(); ++j)
      layer.weight.data[j] -= 1e-3 * grads[2 * i].data[j];
    for (size_t j = 0; j < layer.bias.data.size(); ++j)
      layer.bias.data[j] -= 1e-3 * grads[2 * i + 1].data[j];
  }
  CHECK(mean_e(complete) < before_complete);
  CHECK(mean_e(transported) > before_transported);
}

TEST_CASE("full-code chain matches the residual chain shifted by the start") {
  // With zero energy both chains add the same noise, so code - start equals
  // the residual up to summation order.
  LangevinConfig cfg;
  Tensor start = Tensor::vec({1.0, 2.0, 3.0});
  Rng a(8), b(8);
  const Tensor code = langevin_sample_code(zero_energy(), start, cfg, a);
  const Residual r = langevin_sample_residual(zero_energy(), start, cfg, b);
  for (int i = 0; i < 3; ++i)
    CHECK(code.data[i] ==
          doctest::Approx(start.data[i] + r.values.data[i]).epsilon(1e-13));
}
