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

#include <atomic>
#include <cstdlib>
#include <cstring>

#include "hiertype/errors.h"
#include "hiertype/numcore/kernels.h"

namespace hiertype::numcore::kernels {

#ifndef HIERTYPE_HAVE_AVX2
const KernelTable *avx2_table() { return nullptr; }
#endif

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(__i386__)
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

bool backend_available(Backend backend) {
  switch (backend) {
    case Backend::kScalar:
      return true;
    case Backend::kAvx2:
      return avx2_table() != nullptr && cpu_has_avx2();
  }
  return false;
}

namespace {

Backend detect() {
  const char *env = std::getenv("HIERTYPE_SIMD");
  if (env != nullptr && std::strcmp(env, "scalar") == 0) {
    return Backend::kScalar;
  }
  return backend_available(Backend::kAvx2) ? Backend::kAvx2 : Backend::kScalar;
}

std::atomic<Backend> &selected() {
  static std::atomic<Backend> backend{detect()};
  return backend;
}

}  // namespace

Backend active_backend() { return selected().load(std::memory_order_relaxed); }

void set_backend(Backend backend) {
  if (!backend_available(backend)) {
    throw UsageError(std::string("SIMD backend not available: ") +
                     backend_name(backend));
  }
  selected().store(backend, std::memory_order_relaxed);
}

const char *backend_name(Backend backend) {
  return backend == Backend::kAvx2 ? "avx2" : "scalar";
}

const KernelTable &active() {
  return active_backend() == Backend::kAvx2 ? *avx2_table() : scalar_table();
}

}  // namespace hiertype::numcore::kernels
