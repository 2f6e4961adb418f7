#include "verilab/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "verilab/error.hpp"

namespace verilab {

std::size_t shape_size(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

std::string shape_string(const Shape& shape) {
  std::string out = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i != 0) out += ",";
    out += std::to_string(shape[i]);
  }
  return out + "]";
}

Tensor::Tensor(Shape shape) : shape_(std::move(shape)), data_(shape_size(shape_), 0.0) {}

Tensor::Tensor(Shape shape, std::vector<double> data) : shape_(std::move(shape)), data_(std::move(data)) {
  require(shape_size(shape_) == data_.size(), ErrorKind::dimension,
          [&] { return "shape " + shape_string(shape_) + " does not match " + std::to_string(data_.size()) + " values"; });
}

Tensor Tensor::scalar(double value) { return Tensor(Shape{}, {value}); }

Tensor Tensor::vector(std::vector<double> values) {
  const std::size_t n = values.size();
  return Tensor(Shape{n}, std::move(values));
}

Tensor Tensor::matrix(const std::vector<std::vector<double>>& rows) {
  const std::size_t n = rows.size();
  const std::size_t m = n == 0 ? 0 : rows.front().size();
  std::vector<double> data;
  data.reserve(n * m);
  for (const auto& r : rows) {
    require(r.size() == m, ErrorKind::dimension, "ragged matrix rows");
    data.insert(data.end(), r.begin(), r.end());
  }
  return Tensor(Shape{n, m}, std::move(data));
}

std::size_t Tensor::dim(std::size_t axis) const {
  require(axis < shape_.size(), ErrorKind::dimension,
          [&] { return "axis " + std::to_string(axis) + " out of range for shape " + shape_string(shape_); });
  return shape_[axis];
}

std::span<double> Tensor::row(std::size_t i) {
  const std::size_t c = cols();
  return std::span<double>(data_).subspan(i * c, c);
}

std::span<const double> Tensor::row(std::size_t i) const {
  const std::size_t c = cols();
  return std::span<const double>(data_).subspan(i * c, c);
}

double Tensor::item() const {
  require(data_.size() == 1, ErrorKind::contract, [&] { return "item() on tensor of shape " + shape_string(shape_); });
  return data_.front();
}

bool Tensor::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

void Tensor::fill(double value) { std::fill(data_.begin(), data_.end(), value); }

Tensor gather_rows(const Tensor& matrix, std::span<const std::size_t> indices) {
  const std::size_t c = matrix.cols();
  Tensor out(Shape{indices.size(), c});
  for (std::size_t i = 0; i < indices.size(); ++i) {
    require(indices[i] < matrix.rows(), ErrorKind::index, "row index out of range");
    std::copy_n(matrix.row(indices[i]).begin(), c, out.row(i).begin());
  }
  return out;
}

}  // namespace verilab
