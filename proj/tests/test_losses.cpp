#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>

#include "ltc/losses.hpp"
#include "ltc/metrics.hpp"
#include "ltc/rng.hpp"

using namespace ltc;

namespace {

// Discriminator computing score = head_bias - max_i relu(p_i.x): one point
// layer picking the x coordinate, one negated head. Lets tests pin exact
// scores per cloud.
NetworkParams pick_x_discriminator(double head_bias) {
  NetworkParams d;
  d.role = Role::Discriminator;
  DenseLayer point;
  point.name = "disc.point1";
  point.weight = Tensor({3, 1}, {1.0, 0.0, 0.0});
  point.bias = Tensor::zeros({1});
  d.layers.push_back(point);
  d.point_layers = 1;
  DenseLayer head;
  head.name = "disc.out";
  head.weight = Tensor({1, 1}, {-1.0});
  head.bias = Tensor({1}, {head_bias});
  d.layers.push_back(head);
  return d;
}

NetworkParams zero_discriminator() { return pick_x_discriminator(0.0); }

Tensor cloud_with_max_x(double max_x) {
  // all other coordinates are negative, so relu keeps only max_x when
  // positive and the pooled value is max(0, max_x)
  return Tensor({2, 3}, {max_x, -1.0, -1.0, -2.0, -1.0, -1.0});
}

Tensor random_cloud(Rng& rng, int n) {
  Tensor pts = Tensor::zeros({n, 3});
  for (double& v : pts.data) v = rng.uniform(-0.5, 0.5);
  return pts;
}

}  // namespace

TEST_CASE("discriminator hinge loss hand values") {
  // D(real) = 2, D(fake) = -2: both hinges inactive, loss 0
  {
    Tape t;
    auto d = pick_x_discriminator(2.0);  // score = 2 - max relu(x)
    auto pn = push_params(t, d, true);
    auto real = t.constant(cloud_with_max_x(-1.0));  // score 2
    auto fake = t.constant(cloud_with_max_x(4.0));   // score -2
    auto loss = discriminator_loss(t, pn, d.point_layers, {real}, {fake}, 2);
    CHECK(t.value(loss).data[0] == 0.0);
  }
  // D(real) = 0, D(fake) = 0: loss 2
  {
    Tape t;
    auto d = zero_discriminator();
    auto pn = push_params(t, d, true);
    auto real = t.constant(cloud_with_max_x(-1.0));
    auto fake = t.constant(cloud_with_max_x(-2.0));
    auto loss = discriminator_loss(t, pn, d.point_layers, {real}, {fake}, 2);
    CHECK(t.value(loss).data[0] == 2.0);
  }
  // D(real) = -3, D(fake) = +3: loss 8
  {
    Tape t;
    auto d = pick_x_discriminator(3.0);  // score = 3 - max relu(x)
    auto pn = push_params(t, d, true);
    auto real = t.constant(cloud_with_max_x(6.0));   // score -3
    auto fake = t.constant(cloud_with_max_x(-1.0));  // score 3
    auto loss = discriminator_loss(t, pn, d.point_layers, {real}, {fake}, 2);
    CHECK(t.value(loss).data[0] == 8.0);
  }
}

TEST_CASE("hinge loss is nonnegative, zero only at satisfied margins") {
  Rng rng(1);
  for (int k = 0; k < 30; ++k) {
    const double bias = rng.uniform(-2.0, 4.0);
    auto d = pick_x_discriminator(bias);
    Tape t;
    auto pn = push_params(t, d, true);
    auto real = t.constant(cloud_with_max_x(rng.uniform(-2.0, 6.0)));
    auto fake = t.constant(cloud_with_max_x(rng.uniform(-2.0, 6.0)));
    auto loss = discriminator_loss(t, pn, d.point_layers, {real}, {fake}, 2);
    const double real_score =
        t.value(discriminator_forward(t, pn, real, d.point_layers, 2)).data[0];
    const double fake_score =
        t.value(discriminator_forward(t, pn, fake, d.point_layers, 2)).data[0];
    CHECK(t.value(loss).data[0] >= 0.0);
    if (real_score >= 1.0 && fake_score <= -1.0)
      CHECK(t.value(loss).data[0] == 0.0);
    else
      CHECK(t.value(loss).data[0] > 0.0);
  }
}

TEST_CASE("generator term is minus the mean score with frozen discriminator") {
  Tape t;
  auto d = pick_x_discriminator(5.0);  // score 5 on all-negative clouds
  auto pn = push_params(t, d, false);
  auto c1 = t.constant(cloud_with_max_x(-1.0));
  auto c2 = t.constant(cloud_with_max_x(-2.0));
  auto term = generator_adv_term(t, pn, d.point_layers, {c1, c2}, 2);
  CHECK(t.value(term).data[0] == -5.0);

  // frozen parameters receive no gradient storage at all
  t.backward(term);
  for (const auto& ln : pn) {
    const Tensor gw = t.grad(ln.weight);
    for (double v : gw.data) CHECK(v == 0.0);
  }

  Tape t2;
  auto zero = zero_discriminator();
  auto pn2 = push_params(t2, zero, false);
  auto c3 = t2.constant(cloud_with_max_x(-1.0));
  CHECK(t2.value(generator_adv_term(t2, pn2, zero.point_layers, {c3}, 2)).data[0] ==
        0.0);
}

TEST_CASE("encoder-decoder loss composition") {
  LossWeights w;  // fidelity 2, adversarial 1
  Tape t;
  auto recon = t.constant(Tensor::scalar(1.0));
  auto fid = t.constant(Tensor::scalar(0.5));
  auto adv = t.constant(Tensor::scalar(-0.25));
  CHECK(t.value(encoder_decoder_loss(t, recon, fid, adv, w)).data[0] == 1.75);

  LossWeights zero;
  zero.fidelity_weight = 0.0;
  zero.adversarial_weight = 0.0;
  CHECK(t.value(encoder_decoder_loss(t, recon, fid, adv, zero)).data[0] == 1.0);
}

TEST_CASE("composition matches a hand-built sum on random inputs") {
  Rng rng(2);
  for (int k = 0; k < 50; ++k) {
    LossWeights w;
    w.fidelity_weight = rng.uniform(0.0, 3.0);
    w.adversarial_weight = rng.uniform(0.0, 3.0);
    const double r = rng.uniform(-2.0, 2.0);
    const double f = rng.uniform(-2.0, 2.0);
    const double a = rng.uniform(-2.0, 2.0);
    Tape t;
    auto loss = encoder_decoder_loss(t, t.constant(Tensor::scalar(r)),
                                     t.constant(Tensor::scalar(f)),
                                     t.constant(Tensor::scalar(a)), w);
    Tape t2;
    auto expected = t2.add(
        t2.add(t2.constant(Tensor::scalar(r)),
               t2.scalar_mul(t2.constant(Tensor::scalar(f)), w.fidelity_weight)),
        t2.scalar_mul(t2.constant(Tensor::scalar(a)), w.adversarial_weight));
    CHECK(t.value(loss).data[0] == t2.value(expected).data[0]);
  }
}

TEST_CASE("recon and fidelity losses delegate to the metric kernels exactly") {
  Rng rng(3);
  for (int k = 0; k < 30; ++k) {
    const PointCloud a = PointCloud(random_cloud(rng, 4 + static_cast<int>(rng.index(8))));
    const PointCloud b = PointCloud(random_cloud(rng, 4 + static_cast<int>(rng.index(8))));
    Tape t;
    auto na = t.constant(a.points);
    auto nb = t.constant(b.points);
    CHECK(t.value(recon_loss(t, na, nb)).data[0] == chamfer_distance(a, b));
    CHECK(t.value(fidelity_loss(t, na, nb)).data[0] == unidirectional_chamfer(a, b));
  }
}

TEST_CASE("recon loss examples") {
  Rng rng(4);
  const PointCloud y = PointCloud(random_cloud(rng, 9));
  Tape t;
  auto ny = t.constant(y.points);
  CHECK(t.value(recon_loss(t, ny, ny)).data[0] == 0.0);

  const PointCloud a = PointCloud::from_rows({{0.0, 0.0, 0.0}});
  const PointCloud b = PointCloud::from_rows({{1.0, 0.0, 0.0}});
  Tape t2;
  CHECK(t2.value(recon_loss(t2, t2.constant(a.points), t2.constant(b.points))).data[0] ==
        2.0);
}

TEST_CASE("min_zero matches min(0, x)") {
  Tape t;
  CHECK(t.value(min_zero(t, t.constant(Tensor::scalar(3.0)))).data[0] == 0.0);
  CHECK(t.value(min_zero(t, t.constant(Tensor::scalar(-1.5)))).data[0] == -1.5);
  CHECK(t.value(min_zero(t, t.constant(Tensor::scalar(0.0)))).data[0] == 0.0);
}
