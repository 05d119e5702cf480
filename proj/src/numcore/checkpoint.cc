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

#include "hiertype/numcore/checkpoint.h"

#include <cstring>
#include <fstream>
#include <sstream>

#include "binary_io.h"
#include "hiertype/errors.h"
#include "text_util.h"

namespace hiertype::numcore {

namespace {
constexpr char kMagic[8] = {'H', 'T', 'C', 'K', 'P', 'T', '\0', '\0'};
}  // namespace

std::string TensorArchive::serialize() const {
  internal::ByteWriter out;
  out.bytes(kMagic, sizeof(kMagic));
  out.u32(kVersion);
  out.u32(static_cast<std::uint32_t>(metadata.size()));
  for (const auto &[k, v] : metadata) {
    out.str(k);
    out.str(v);
  }
  out.u32(static_cast<std::uint32_t>(tensors.size()));
  for (const auto &[name, t] : tensors) {
    out.str(name);
    out.u32(static_cast<std::uint32_t>(t.rank()));
    for (size_t d : t.shape()) out.u64(d);
    for (double v : t.values()) out.f64(v);
  }
  return out.take();
}

TensorArchive TensorArchive::deserialize(const std::string &bytes) {
  internal::ByteReader in(bytes, "checkpoint");
  char magic[8];
  in.bytes(magic, sizeof(magic));
  if (std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw DataError("checkpoint: bad magic");
  }
  std::uint32_t version = in.u32();
  if (version != kVersion) {
    throw DataError("checkpoint: unsupported version " + std::to_string(version));
  }
  TensorArchive archive;
  std::uint32_t n_meta = in.u32();
  for (std::uint32_t i = 0; i < n_meta; ++i) {
    std::string k = in.str();
    archive.metadata[k] = in.str();
  }
  std::uint32_t n_tensors = in.u32();
  for (std::uint32_t i = 0; i < n_tensors; ++i) {
    std::string name = in.str();
    std::uint32_t rank = in.u32();
    Shape shape(rank);
    for (auto &d : shape) d = in.u64();
    size_t n = num_elements(shape);
    if (n > in.remaining() / 8) throw DataError("checkpoint: truncated tensor " + name);
    std::vector<double> values(n);
    for (auto &v : values) v = in.f64();
    archive.tensors.emplace(name, Tensor(std::move(shape), std::move(values)));
  }
  if (in.remaining() != 0) throw DataError("checkpoint: trailing bytes");
  return archive;
}

void TensorArchive::save(const std::string &path) const {
  auto out = internal::open_output(path, std::ios::binary);
  std::string bytes = serialize();
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IOError("write failed for " + path);
}

TensorArchive TensorArchive::load(const std::string &path) {
  auto in = internal::open_input(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return deserialize(buf.str());
}

}  // namespace hiertype::numcore
