// Copyright (c) 2026 UPN Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "upn/tensor_io.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>

namespace upn {

namespace {

constexpr char kMagic[8] = {'U', 'P', 'N', 'C', 'K', 'P', 'T', '1'};
constexpr uint32_t kVersion = 1;

void put_u32(std::ostream& s, uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                        static_cast<unsigned char>((v >> 8) & 0xff),
                        static_cast<unsigned char>((v >> 16) & 0xff),
                        static_cast<unsigned char>((v >> 24) & 0xff)};
  s.write(reinterpret_cast<char*>(b), 4);
}

uint32_t get_u32(std::istream& s, const std::string& what) {
  unsigned char b[4];
  s.read(reinterpret_cast<char*>(b), 4);
  if (!s) throw std::runtime_error("checkpoint truncated reading " + what);
  return static_cast<uint32_t>(b[0]) | (b[1] << 8) | (b[2] << 16) |
         (static_cast<uint32_t>(b[3]) << 24);
}

}  // namespace

void quantize_to_f32(std::vector<double>& values) {
  for (double& v : values) v = static_cast<double>(static_cast<float>(v));
}

void write_tensor_file(const std::string& path,
                       const std::vector<NamedTensor>& tensors) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot create checkpoint: " + path);
  f.write(kMagic, 8);
  put_u32(f, kVersion);
  put_u32(f, static_cast<uint32_t>(tensors.size()));
  for (const auto& t : tensors) {
    put_u32(f, static_cast<uint32_t>(t.name.size()));
    f.write(t.name.data(), static_cast<std::streamsize>(t.name.size()));
    put_u32(f, static_cast<uint32_t>(t.dims.size()));
    uint64_t count = 1;
    for (uint32_t d : t.dims) {
      put_u32(f, d);
      count *= d;
    }
    if (count != t.values.size())
      throw std::runtime_error("tensor " + t.name + " dims/values mismatch");
    for (double v : t.values) {
      const float fv = static_cast<float>(v);
      uint32_t u;
      std::memcpy(&u, &fv, 4);
      put_u32(f, u);
    }
  }
  if (!f) throw std::runtime_error("short write to checkpoint: " + path);
}

std::vector<NamedTensor> read_tensor_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open checkpoint: " + path);
  char magic[8];
  f.read(magic, 8);
  if (!f || std::memcmp(magic, kMagic, 8) != 0)
    throw std::runtime_error("bad checkpoint magic: " + path);
  const uint32_t version = get_u32(f, "version");
  if (version != kVersion)
    throw std::runtime_error("unsupported checkpoint version " +
                             std::to_string(version) + ": " + path);
  const uint32_t count = get_u32(f, "tensor count");
  std::vector<NamedTensor> tensors(count);
  for (uint32_t i = 0; i < count; ++i) {
    NamedTensor& t = tensors[i];
    const uint32_t name_len = get_u32(f, "name length");
    t.name.resize(name_len);
    f.read(t.name.data(), name_len);
    if (!f) throw std::runtime_error("checkpoint truncated in name: " + path);
    const uint32_t rank = get_u32(f, "rank of " + t.name);
    if (rank > 8)
      throw std::runtime_error("tensor " + t.name + " has absurd rank");
    t.dims.resize(rank);
    uint64_t n = 1;
    for (uint32_t d = 0; d < rank; ++d) {
      t.dims[d] = get_u32(f, "dims of " + t.name);
      n *= t.dims[d];
    }
    if (n > (1ull << 31))
      throw std::runtime_error("tensor " + t.name + " too large");
    t.values.resize(n);
    for (uint64_t j = 0; j < n; ++j) {
      const uint32_t u = get_u32(f, "values of " + t.name);
      float fv;
      std::memcpy(&fv, &u, 4);
      t.values[j] = fv;
    }
  }
  return tensors;
}

}  // namespace upn
