#include "ltc/metrics.hpp"

#include <cmath>

namespace ltc {

PointCloud::PointCloud(Tensor pts) : points(std::move(pts)) {
  if (points.shape.size() != 2 || points.shape[1] != 3 || points.shape[0] < 1)
    throw Error("point cloud: expected shape [n,3] with n >= 1, got " +
                shape_str(points.shape));
}

PointCloud PointCloud::from_rows(const std::vector<std::array<double, 3>>& rows) {
  std::vector<double> data;
  data.reserve(rows.size() * 3);
  for (const auto& r : rows) {
    data.push_back(r[0]);
    data.push_back(r[1]);
    data.push_back(r[2]);
  }
  return PointCloud(Tensor({static_cast<int>(rows.size()), 3}, std::move(data)));
}

static void check_cloud(const Tensor& t, const char* which) {
  if (t.shape.size() != 2 || t.shape[1] != 3)
    throw Error(std::string(which) + ": expected shape [n,3], got " + shape_str(t.shape));
  if (t.shape[0] < 1) throw Error(std::string(which) + ": empty point cloud");
}

std::vector<int> nearest_neighbor_indices(const Tensor& src, const Tensor& dst) {
  check_cloud(src, "nearest_neighbor_indices src");
  check_cloud(dst, "nearest_neighbor_indices dst");
  const int ns = src.shape[0], nd = dst.shape[0];
  const double* s = src.data.data();
  const double* d = dst.data.data();
  std::vector<int> nn(ns);
  for (int i = 0; i < ns; ++i) {
    const double sx = s[3 * i], sy = s[3 * i + 1], sz = s[3 * i + 2];
    double best = -1.0;
    int best_j = 0;
    for (int j = 0; j < nd; ++j) {
      const double dx = sx - d[3 * j];
      const double dy = sy - d[3 * j + 1];
      const double dz = sz - d[3 * j + 2];
      const double dist2 = dx * dx + dy * dy + dz * dz;
      if (best < 0.0 || dist2 < best) {
        best = dist2;
        best_j = j;
      }
    }
    nn[i] = best_j;
  }
  return nn;
}

double directed_mean_nn_distance(const Tensor& src, const Tensor& dst,
                                 const std::vector<int>& nn, bool squared) {
  const int ns = src.shape[0];
  const double* s = src.data.data();
  const double* d = dst.data.data();
  double sum = 0.0;
  for (int i = 0; i < ns; ++i) {
    const int j = nn[i];
    const double dx = s[3 * i] - d[3 * j];
    const double dy = s[3 * i + 1] - d[3 * j + 1];
    const double dz = s[3 * i + 2] - d[3 * j + 2];
    const double dist2 = dx * dx + dy * dy + dz * dz;
    sum += squared ? dist2 : std::sqrt(dist2);
  }
  return sum / ns;
}

double chamfer_distance(const PointCloud& a, const PointCloud& b, bool squared) {
  const auto nn_ab = nearest_neighbor_indices(a.points, b.points);
  const auto nn_ba = nearest_neighbor_indices(b.points, a.points);
  return directed_mean_nn_distance(a.points, b.points, nn_ab, squared) +
         directed_mean_nn_distance(b.points, a.points, nn_ba, squared);
}

double unidirectional_chamfer(const PointCloud& src, const PointCloud& dst, bool squared) {
  const auto nn = nearest_neighbor_indices(src.points, dst.points);
  return directed_mean_nn_distance(src.points, dst.points, nn, squared);
}

}  // namespace ltc
