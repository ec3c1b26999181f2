#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "ltc/metrics.hpp"
#include "ltc/rng.hpp"
#include "ltc/tape.hpp"

using namespace ltc;

namespace {

// Independent brute-force oracle, written directly from the definition:
// average of per-point minimum L2 distances, one direction at a time.
double oracle_directed(const PointCloud& from, const PointCloud& to) {
  double sum = 0.0;
  for (int i = 0; i < from.size(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (int j = 0; j < to.size(); ++j) {
      const double dx = from.x(i) - to.x(j);
      const double dy = from.y(i) - to.y(j);
      const double dz = from.z(i) - to.z(j);
      const double d = std::sqrt(dx * dx + dy * dy + dz * dz);
      if (d < best) best = d;
    }
    sum += best;
  }
  return sum / from.size();
}

PointCloud random_cloud(Rng& rng, int n) {
  Tensor pts = Tensor::zeros({n, 3});
  for (double& v : pts.data) v = rng.uniform(-1.0, 1.0);
  return PointCloud(std::move(pts));
}

}  // namespace

TEST_CASE("chamfer distance of a cloud with itself is zero") {
  Rng rng(3);
  const PointCloud s = random_cloud(rng, 17);
  CHECK(chamfer_distance(s, s) == 0.0);
}

TEST_CASE("singleton clouds one unit apart: CD 2, UCD 1") {
  const PointCloud a = PointCloud::from_rows({{0.0, 0.0, 0.0}});
  const PointCloud b = PointCloud::from_rows({{1.0, 0.0, 0.0}});
  CHECK(chamfer_distance(a, b) == 2.0);
  CHECK(unidirectional_chamfer(a, b) == 1.0);

  const PointCloud two = PointCloud::from_rows({{0.0, 0.0, 0.0}, {2.0, 0.0, 0.0}});
  const PointCloud one = PointCloud::from_rows({{0.0, 0.0, 0.0}});
  CHECK(unidirectional_chamfer(two, one) == 1.0);
}

TEST_CASE("UCD is zero when the source is a subset of the target") {
  Rng rng(5);
  const PointCloud big = random_cloud(rng, 20);
  Tensor sub = Tensor::zeros({8, 3});
  for (int i = 0; i < 8; ++i)
    for (int k = 0; k < 3; ++k) sub.data[3 * i + k] = big.points.data[3 * (2 * i) + k];
  CHECK(unidirectional_chamfer(PointCloud(sub), big) == 0.0);
}

TEST_CASE("matches the brute-force oracle exactly on random pairs") {
  Rng rng(9);
  for (int k = 0; k < 200; ++k) {
    const PointCloud a = random_cloud(rng, 4 + static_cast<int>(rng.index(12)));
    const PointCloud b = random_cloud(rng, 4 + static_cast<int>(rng.index(12)));
    CHECK(chamfer_distance(a, b) == oracle_directed(a, b) + oracle_directed(b, a));
    CHECK(unidirectional_chamfer(a, b) == oracle_directed(a, b));
  }
}

TEST_CASE("CD symmetry and UCD <= CD on random pairs") {
  Rng rng(13);
  for (int k = 0; k < 200; ++k) {
    const PointCloud a = random_cloud(rng, 4 + static_cast<int>(rng.index(12)));
    const PointCloud b = random_cloud(rng, 4 + static_cast<int>(rng.index(12)));
    const double cd = chamfer_distance(a, b);
    CHECK(cd == chamfer_distance(b, a));
    CHECK(cd >= 0.0);
    CHECK(unidirectional_chamfer(a, b) <= cd);
  }
}

TEST_CASE("nearest neighbor indices: identity, ties, oracle") {
  Rng rng(17);
  const PointCloud s = random_cloud(rng, 10);
  const auto self_nn = nearest_neighbor_indices(s.points, s.points);
  for (int i = 0; i < 10; ++i) CHECK(self_nn[i] == i);

  const PointCloud origin = PointCloud::from_rows({{0.0, 0.0, 0.0}});
  const PointCloud pair =
      PointCloud::from_rows({{1.0, 0.0, 0.0}, {-1.0, 0.0, 0.0}});
  CHECK(nearest_neighbor_indices(origin.points, pair.points)[0] == 0);

  // 100 random points against the oracle's argmin
  const PointCloud src = random_cloud(rng, 100);
  const PointCloud dst = random_cloud(rng, 37);
  const auto nn = nearest_neighbor_indices(src.points, dst.points);
  for (int i = 0; i < src.size(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    int best_j = 0;
    for (int j = 0; j < dst.size(); ++j) {
      const double dx = src.x(i) - dst.x(j);
      const double dy = src.y(i) - dst.y(j);
      const double dz = src.z(i) - dst.z(j);
      const double d2 = dx * dx + dy * dy + dz * dz;
      if (d2 < best) {
        best = d2;
        best_j = j;
      }
    }
    CHECK(nn[i] == best_j);
  }
}

TEST_CASE("empty clouds are rejected") {
  CHECK_THROWS_AS(PointCloud(Tensor::zeros({0, 3})), Error);
  CHECK_THROWS_AS(nearest_neighbor_indices(Tensor::zeros({0, 3}), Tensor::zeros({1, 3})),
                  Error);
}

TEST_CASE("squared-distance variant applies to both directions") {
  const PointCloud a = PointCloud::from_rows({{0.0, 0.0, 0.0}});
  const PointCloud b = PointCloud::from_rows({{2.0, 0.0, 0.0}});
  CHECK(chamfer_distance(a, b, true) == 8.0);
  CHECK(unidirectional_chamfer(a, b, true) == 4.0);
}

TEST_CASE("tape chamfer op equals the standalone function exactly") {
  Rng rng(21);
  for (int k = 0; k < 50; ++k) {
    const PointCloud a = random_cloud(rng, 4 + static_cast<int>(rng.index(10)));
    const PointCloud b = random_cloud(rng, 4 + static_cast<int>(rng.index(10)));
    Tape t;
    auto na = t.constant(a.points);
    auto nb = t.constant(b.points);
    CHECK(t.value(t.chamfer(na, nb)).data[0] == chamfer_distance(a, b));
    CHECK(t.value(t.unidirectional_chamfer(na, nb)).data[0] ==
          unidirectional_chamfer(a, b));
  }
}
