#pragma once

#include <array>
#include <vector>

#include "ltc/tensor.hpp"

namespace ltc {

// Fixed-size set of 3-D points; the domain object for partial and complete
// shapes. Evaluation-time clouds are expected normalized to the unit cube
// centered at the origin.
struct PointCloud {
  Tensor points;  // shape {n, 3}

  PointCloud() = default;
  explicit PointCloud(Tensor pts);
  static PointCloud from_rows(const std::vector<std::array<double, 3>>& rows);

  int size() const { return points.shape.empty() ? 0 : points.shape[0]; }
  double x(int i) const { return points.data[3 * static_cast<size_t>(i)]; }
  double y(int i) const { return points.data[3 * static_cast<size_t>(i) + 1]; }
  double z(int i) const { return points.data[3 * static_cast<size_t>(i) + 2]; }
};

// For each src point, the index of the L2-nearest dst point; ties resolved
// to the lowest dst index. Brute-force O(|src|·|dst|) scan.
std::vector<int> nearest_neighbor_indices(const Tensor& src, const Tensor& dst);

// Mean over src points of the distance to the assigned dst point.
double directed_mean_nn_distance(const Tensor& src, const Tensor& dst,
                                 const std::vector<int>& nn, bool squared);

// Symmetric average nearest-neighbor distance (L2, unsquared by default;
// `squared` switches to the squared-distance convention used elsewhere).
double chamfer_distance(const PointCloud& a, const PointCloud& b, bool squared = false);

// One-directional variant, src -> dst only; not symmetric.
double unidirectional_chamfer(const PointCloud& src, const PointCloud& dst,
                              bool squared = false);

}  // namespace ltc
