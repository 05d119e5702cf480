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

#include "hiertype/numcore/kernels.h"

namespace hiertype::numcore::kernels {
namespace {

double dot_scalar(const double *x, const double *y, size_t n) {
  double sum = 0.0;
  for (size_t i = 0; i < n; ++i) sum += x[i] * y[i];
  return sum;
}

void axpy_scalar(double alpha, const double *x, double *y, size_t n) {
  for (size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void gemv_acc_scalar(const double *a, const double *x, double *y, size_t rows,
                     size_t cols) {
  for (size_t r = 0; r < rows; ++r) y[r] += dot_scalar(a + r * cols, x, cols);
}

void gemv_t_acc_scalar(const double *a, const double *x, double *y,
                       size_t rows, size_t cols) {
  for (size_t r = 0; r < rows; ++r) axpy_scalar(x[r], a + r * cols, y, cols);
}

void ger_scalar(double alpha, const double *x, const double *y, double *a,
                size_t rows, size_t cols) {
  for (size_t r = 0; r < rows; ++r) {
    axpy_scalar(alpha * x[r], y, a + r * cols, cols);
  }
}

}  // namespace

const KernelTable &scalar_table() {
  static const KernelTable table = {dot_scalar, axpy_scalar, gemv_acc_scalar,
                                    gemv_t_acc_scalar, ger_scalar};
  return table;
}

}  // namespace hiertype::numcore::kernels
