#include "ltc/cloud_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace ltc {

static void write_lines(const std::string& path, const PointCloud& cloud,
                        const std::vector<double>* scalars) {
  std::ofstream out(path);
  if (!out) throw Error("write_cloud: cannot open " + path);
  char buf[128];
  for (int i = 0; i < cloud.size(); ++i) {
    if (scalars)
      std::snprintf(buf, sizeof(buf), "%.17g %.17g %.17g %.17g\n", cloud.x(i),
                    cloud.y(i), cloud.z(i), (*scalars)[i]);
    else
      std::snprintf(buf, sizeof(buf), "%.17g %.17g %.17g\n", cloud.x(i), cloud.y(i),
                    cloud.z(i));
    out << buf;
  }
  if (!out) throw Error("write_cloud: write failed for " + path);
}

void write_cloud(const std::string& path, const PointCloud& cloud) {
  write_lines(path, cloud, nullptr);
}

void write_cloud_with_scalar(const std::string& path, const PointCloud& cloud,
                             const std::vector<double>& scalars) {
  if (static_cast<int>(scalars.size()) != cloud.size())
    throw Error("write_cloud_with_scalar: scalar count does not match point count");
  write_lines(path, cloud, &scalars);
}

static CloudWithScalar read_impl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("read_cloud: cannot open " + path);
  std::vector<double> coords;
  std::vector<double> scalars;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    size_t first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ls(line);
    double x, y, z;
    if (!(ls >> x >> y >> z) || !std::isfinite(x) || !std::isfinite(y) ||
        !std::isfinite(z))
      throw Error(path + ":" + std::to_string(line_no) + ": expected 3 finite floats");
    coords.push_back(x);
    coords.push_back(y);
    coords.push_back(z);
    double s;
    scalars.push_back(ls >> s ? s : 0.0);
  }
  if (coords.empty()) throw Error("read_cloud: no points in " + path);
  const int n = static_cast<int>(coords.size() / 3);
  CloudWithScalar result;
  result.cloud = PointCloud(Tensor({n, 3}, std::move(coords)));
  result.scalars = std::move(scalars);
  return result;
}

PointCloud read_cloud(const std::string& path) { return read_impl(path).cloud; }

CloudWithScalar read_cloud_with_scalar(const std::string& path) {
  return read_impl(path);
}

}  // namespace ltc
