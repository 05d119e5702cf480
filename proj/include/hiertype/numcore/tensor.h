// Copyright 2026 The hiertype Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef HIERTYPE_NUMCORE_TENSOR_H_
#define HIERTYPE_NUMCORE_TENSOR_H_

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace hiertype::numcore {

using Shape = std::vector<size_t>;

size_t num_elements(const Shape &shape);
std::string shape_string(const Shape &shape);

// Dense row-major tensor of doubles.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, double fill = 0.0);
  Tensor(Shape shape, std::vector<double> data);

  static Tensor vector(std::initializer_list<double> values);
  static Tensor vector(std::span<const double> values);
  static Tensor matrix(size_t rows, size_t cols,
                       std::initializer_list<double> values);
  static Tensor scalar(double value) { return Tensor({1}, {value}); }

  const Shape &shape() const { return shape_; }
  size_t rank() const { return shape_.size(); }
  size_t size() const { return data_.size(); }
  size_t dim(size_t i) const { return shape_.at(i); }
  // Matrix view helpers; a rank-1 tensor is a single row.
  size_t rows() const { return rank() >= 2 ? shape_[0] : 1; }
  size_t cols() const { return rank() >= 2 ? size() / shape_[0] : size(); }

  double *data() { return data_.data(); }
  const double *data() const { return data_.data(); }
  std::span<double> span() { return data_; }
  std::span<const double> span() const { return data_; }
  std::vector<double> &values() { return data_; }
  const std::vector<double> &values() const { return data_; }

  double &operator[](size_t i) { return data_[i]; }
  double operator[](size_t i) const { return data_[i]; }
  double &at(size_t r, size_t c) { return data_[r * cols() + c]; }
  double at(size_t r, size_t c) const { return data_[r * cols() + c]; }

  std::span<double> row(size_t r) {
    return std::span<double>(data_).subspan(r * cols(), cols());
  }
  std::span<const double> row(size_t r) const {
    return std::span<const double>(data_).subspan(r * cols(), cols());
  }

  void fill(double v);
  void reshape(Shape shape);
  bool all_finite() const;

  bool operator==(const Tensor &other) const = default;

 private:
  Shape shape_;
  std::vector<double> data_;
};

// Throws ShapeError when the shapes differ.
void require_same_shape(const Tensor &a, const Tensor &b, const char *op);

}  // namespace hiertype::numcore

#endif  // HIERTYPE_NUMCORE_TENSOR_H_
