#include "ltc/tensor.hpp"

#include <cmath>

namespace ltc {

int64_t shape_size(const std::vector<int>& shape) {
  int64_t n = 1;
  for (int d : shape) n *= d;
  return n;
}

std::string shape_str(const std::vector<int>& shape) {
  std::string s = "[";
  for (size_t i = 0; i < shape.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

Tensor::Tensor(std::vector<int> s, std::vector<double> d)
    : shape(std::move(s)), data(std::move(d)) {
  if (shape_size(shape) != static_cast<int64_t>(data.size()))
    throw Error("tensor: shape " + shape_str(shape) + " does not match " +
                std::to_string(data.size()) + " values");
}

Tensor Tensor::zeros(const std::vector<int>& shape) {
  return Tensor(shape, std::vector<double>(shape_size(shape), 0.0));
}

Tensor Tensor::full(const std::vector<int>& shape, double v) {
  return Tensor(shape, std::vector<double>(shape_size(shape), v));
}

Tensor Tensor::scalar(double v) { return Tensor({1}, {v}); }

Tensor Tensor::vec(std::vector<double> d) {
  const int n = static_cast<int>(d.size());
  return Tensor({n}, std::move(d));
}

double Tensor::scalar_value() const {
  if (!is_scalar()) throw Error("tensor: expected scalar, got shape " + shape_str(shape));
  return data[0];
}

int Tensor::rows() const {
  if (shape.size() != 2) throw Error("tensor: rows() on shape " + shape_str(shape));
  return shape[0];
}

int Tensor::cols() const {
  if (shape.size() != 2) throw Error("tensor: cols() on shape " + shape_str(shape));
  return shape[1];
}

double& Tensor::at(int i, int j) { return data[static_cast<size_t>(i) * cols() + j]; }

double Tensor::at(int i, int j) const { return data[static_cast<size_t>(i) * cols() + j]; }

bool Tensor::all_finite() const {
  for (double v : data)
    if (!std::isfinite(v)) return false;
  return true;
}

}  // namespace ltc
