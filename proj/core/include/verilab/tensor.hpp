#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace verilab {

using Shape = std::vector<std::size_t>;

std::size_t shape_size(const Shape& shape);
std::string shape_string(const Shape& shape);

/// Dense row-major tensor of doubles. A rank-0 tensor holds a single scalar.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape);
  Tensor(Shape shape, std::vector<double> data);

  static Tensor scalar(double value);
  static Tensor vector(std::vector<double> values);
  /// Builds an [rows, cols] matrix from nested rows; all rows must share a length.
  static Tensor matrix(const std::vector<std::vector<double>>& rows);

  [[nodiscard]] const Shape& shape() const noexcept { return shape_; }
  [[nodiscard]] std::size_t rank() const noexcept { return shape_.size(); }
  [[nodiscard]] std::size_t size() const noexcept { return data_.size(); }
  [[nodiscard]] std::size_t dim(std::size_t axis) const;
  [[nodiscard]] std::size_t rows() const { return dim(0); }
  [[nodiscard]] std::size_t cols() const { return dim(1); }

  [[nodiscard]] std::span<double> data() noexcept { return data_; }
  [[nodiscard]] std::span<const double> data() const noexcept { return data_; }
  [[nodiscard]] const std::vector<double>& values() const noexcept { return data_; }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  double& at(std::size_t i, std::size_t j) { return data_[i * shape_[1] + j]; }
  [[nodiscard]] double at(std::size_t i, std::size_t j) const { return data_[i * shape_[1] + j]; }

  [[nodiscard]] std::span<double> row(std::size_t i);
  [[nodiscard]] std::span<const double> row(std::size_t i) const;

  /// Value of a single-element tensor.
  [[nodiscard]] double item() const;
  [[nodiscard]] bool all_finite() const noexcept;

  void fill(double value);

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  Shape shape_;
  std::vector<double> data_;
};

/// Rows `indices` of a rank-2 tensor gathered into a new [indices.size(), cols] tensor.
Tensor gather_rows(const Tensor& matrix, std::span<const std::size_t> indices);

}  // namespace verilab
