#include "rsmt/tensor.hpp"

#include <sstream>

#include "rsmt/errors.hpp"

namespace rsmt {

int shape_size(const std::vector<int>& shape) {
  int n = 1;
  for (int d : shape) n *= d;
  return n;
}

std::string shape_to_string(const std::vector<int>& shape) {
  std::ostringstream os;
  os << "(";
  for (size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ",";
    os << shape[i];
  }
  os << ")";
  return os.str();
}

Tensor::Tensor(std::vector<int> s) : shape(std::move(s)) {
  for (int d : shape) {
    if (d <= 0) throw ShapeError("nonpositive dimension in " + shape_to_string(shape));
  }
  data.assign(static_cast<size_t>(shape_size(shape)), 0.0);
}

Tensor::Tensor(std::vector<int> s, std::vector<double> values)
    : shape(std::move(s)), data(std::move(values)) {
  if (shape_size(shape) != static_cast<int>(data.size())) {
    throw ShapeError("data length " + std::to_string(data.size()) +
                     " does not match shape " + shape_to_string(shape));
  }
}

Tensor Tensor::full(const std::vector<int>& s, double v) {
  Tensor t(s);
  for (double& x : t.data) x = v;
  return t;
}

}  // namespace rsmt
