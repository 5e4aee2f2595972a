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

#ifndef UPN_TENSOR_IO_HPP
#define UPN_TENSOR_IO_HPP

#include <cstdint>
#include <string>
#include <vector>

namespace upn {

/// One named tensor in a checkpoint. Values are held as doubles in memory
/// and stored as 32-bit floats on disk, so freshly loaded (or float-valued)
/// parameters round-trip bit-exactly.
struct NamedTensor {
  std::string name;
  std::vector<uint32_t> dims;
  std::vector<double> values;
};

/// Checkpoint container: magic "UPNCKPT1", u32 version, u32 tensor count,
/// then per tensor: u32 name length + UTF-8 name, u32 rank, u32 dims,
/// little-endian f32 values. Loading validates magic, version and sizes and
/// never returns a partial result.
void write_tensor_file(const std::string& path,
                       const std::vector<NamedTensor>& tensors);
std::vector<NamedTensor> read_tensor_file(const std::string& path);

/// Rounds every value through 32-bit float precision (the on-disk grid).
void quantize_to_f32(std::vector<double>& values);

}  // namespace upn

#endif  // UPN_TENSOR_IO_HPP
