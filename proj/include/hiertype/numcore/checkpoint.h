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

#ifndef HIERTYPE_NUMCORE_CHECKPOINT_H_
#define HIERTYPE_NUMCORE_CHECKPOINT_H_

#include <map>
#include <string>
#include <vector>

#include "hiertype/numcore/tensor.h"

namespace hiertype::numcore {

// Named-tensor container.
//
// Layout (all integers little-endian):
//   magic "HTCKPT\0\0" | u32 version
//   u32 metadata count, then (string key, string value) pairs
//   u32 tensor count, then per tensor:
//     string name | u32 rank | u64 dims[rank] | f64 values[prod(dims)]
// where a string is u32 byte length followed by the bytes. Entries are
// written in key order, so equal contents give identical files.
struct TensorArchive {
  static constexpr std::uint32_t kVersion = 1;

  std::map<std::string, std::string> metadata;
  std::map<std::string, Tensor> tensors;

  std::string serialize() const;
  static TensorArchive deserialize(const std::string &bytes);

  void save(const std::string &path) const;
  static TensorArchive load(const std::string &path);

  bool operator==(const TensorArchive &) const = default;
};

}  // namespace hiertype::numcore

#endif  // HIERTYPE_NUMCORE_CHECKPOINT_H_
