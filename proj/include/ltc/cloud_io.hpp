#pragma once

#include <string>
#include <vector>

#include "ltc/metrics.hpp"

namespace ltc {

// Plain-text .xyz: one point per line, 3 (or 4, with a per-point scalar)
// space-separated decimal floats; '#' starts a comment line. Values are
// written with 17 significant digits so a write/read round trip is exact.

void write_cloud(const std::string& path, const PointCloud& cloud);
void write_cloud_with_scalar(const std::string& path, const PointCloud& cloud,
                             const std::vector<double>& scalars);

// Ignores any columns beyond the first three.
PointCloud read_cloud(const std::string& path);

struct CloudWithScalar {
  PointCloud cloud;
  std::vector<double> scalars;  // zero-filled when the file has 3 columns
};
CloudWithScalar read_cloud_with_scalar(const std::string& path);

}  // namespace ltc
