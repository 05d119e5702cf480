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

#ifndef HIERTYPE_NUMCORE_KERNELS_H_
#define HIERTYPE_NUMCORE_KERNELS_H_

#include <cstddef>

namespace hiertype::numcore::kernels {

// Dense inner-loop kernels shared by the tape ops. Every kernel has a scalar
// reference implementation; an AVX2+FMA variant is selected at runtime when
// the CPU supports it. Matrices are row-major.
enum class Backend { kScalar, kAvx2 };

struct KernelTable {
  // sum_i x[i] * y[i]
  double (*dot)(const double *x, const double *y, size_t n);
  // y[i] += alpha * x[i]
  void (*axpy)(double alpha, const double *x, double *y, size_t n);
  // y[r] += sum_c a[r * cols + c] * x[c]
  void (*gemv_acc)(const double *a, const double *x, double *y, size_t rows,
                   size_t cols);
  // y[c] += sum_r a[r * cols + c] * x[r]
  void (*gemv_t_acc)(const double *a, const double *x, double *y, size_t rows,
                     size_t cols);
  // a[r * cols + c] += alpha * x[r] * y[c]
  void (*ger)(double alpha, const double *x, const double *y, double *a,
              size_t rows, size_t cols);
};

const KernelTable &scalar_table();
// Null when the build has no AVX2 variant.
const KernelTable *avx2_table();

bool cpu_has_avx2();
bool backend_available(Backend backend);

// Active backend: AVX2 when the CPU supports it, unless the environment sets
// HIERTYPE_SIMD=scalar. set_backend() overrides the selection (tests use it
// to compare variants) and throws UsageError for an unavailable backend.
Backend active_backend();
void set_backend(Backend backend);
const char *backend_name(Backend backend);
const KernelTable &active();

inline double dot(const double *x, const double *y, size_t n) {
  return active().dot(x, y, n);
}
inline void axpy(double alpha, const double *x, double *y, size_t n) {
  active().axpy(alpha, x, y, n);
}
inline void gemv_acc(const double *a, const double *x, double *y, size_t rows,
                     size_t cols) {
  active().gemv_acc(a, x, y, rows, cols);
}
inline void gemv_t_acc(const double *a, const double *x, double *y,
                       size_t rows, size_t cols) {
  active().gemv_t_acc(a, x, y, rows, cols);
}
inline void ger(double alpha, const double *x, const double *y, double *a,
                size_t rows, size_t cols) {
  active().ger(alpha, x, y, a, rows, cols);
}

}  // namespace hiertype::numcore::kernels

#endif  // HIERTYPE_NUMCORE_KERNELS_H_
