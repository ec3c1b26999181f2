#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace ltc {

struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

int64_t shape_size(const std::vector<int>& shape);
std::string shape_str(const std::vector<int>& shape);

// Dense row-major tensor of 64-bit floats. Scalars use shape {1}.
struct Tensor {
  std::vector<int> shape;
  std::vector<double> data;

  Tensor() = default;
  Tensor(std::vector<int> s, std::vector<double> d);

  static Tensor zeros(const std::vector<int>& shape);
  static Tensor full(const std::vector<int>& shape, double v);
  static Tensor scalar(double v);
  static Tensor vec(std::vector<double> d);

  int64_t size() const { return static_cast<int64_t>(data.size()); }
  bool is_scalar() const { return size() == 1; }
  double scalar_value() const;

  // 2-D accessors
  int rows() const;
  int cols() const;
  double& at(int i, int j);
  double at(int i, int j) const;

  bool same_shape(const Tensor& o) const { return shape == o.shape; }
  bool all_finite() const;
};

}  // namespace ltc
