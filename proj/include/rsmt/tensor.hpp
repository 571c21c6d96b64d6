#pragma once

#include <string>
#include <vector>

namespace rsmt {

int shape_size(const std::vector<int>& shape);
std::string shape_to_string(const std::vector<int>& shape);

// Dense row-major tensor of doubles. Rank is typically 1..3.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<int> s);
  Tensor(std::vector<int> s, std::vector<double> values);

  static Tensor zeros(const std::vector<int>& s) { return Tensor(s); }
  static Tensor full(const std::vector<int>& s, double v);
  static Tensor scalar(double v) { return Tensor({1}, {v}); }

  int size() const { return static_cast<int>(data.size()); }
  int rank() const { return static_cast<int>(shape.size()); }
  int dim(int i) const { return shape[static_cast<size_t>(i)]; }
  bool same_shape(const Tensor& o) const { return shape == o.shape; }
  std::string shape_str() const { return shape_to_string(shape); }

  double& operator[](int i) { return data[static_cast<size_t>(i)]; }
  double operator[](int i) const { return data[static_cast<size_t>(i)]; }

  // rank-2 access
  double& at(int i, int j) { return data[static_cast<size_t>(i * shape[1] + j)]; }
  double at(int i, int j) const { return data[static_cast<size_t>(i * shape[1] + j)]; }

  // rank-3 access
  double& at(int i, int j, int k) {
    return data[static_cast<size_t>((i * shape[1] + j) * shape[2] + k)];
  }
  double at(int i, int j, int k) const {
    return data[static_cast<size_t>((i * shape[1] + j) * shape[2] + k)];
  }

  std::vector<int> shape;
  std::vector<double> data;
};

}  // namespace rsmt
