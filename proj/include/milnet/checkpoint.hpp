// Copyright 2026 The milnet authors
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

#pragma once

#include <map>
#include <string>

#include "milnet/model.hpp"
#include "milnet/tensor.hpp"

namespace milnet {

// Named-tensor checkpoint file. Layout, all integers little-endian:
//   magic "MILNET1\0"
//   u32 entry count
//   per entry: u32 name length, UTF-8 name, u8 rank, u32 dims[rank],
//              f64 payload in row-major order
//   u32 CRC32 over the concatenated payload bytes of all entries
// Save/load round-trips bit-exactly.

void save_named_tensors(const std::string& path,
                        const std::map<std::string, Tensor>& entries);
std::map<std::string, Tensor> load_named_tensors(const std::string& path);

/// Network checkpoints carry the parameters plus "meta.*" entries encoding
/// the config, so a network can be rebuilt from the file alone.
void save_network(const std::string& path, const Network& net);
Network load_network(const std::string& path);

}  // namespace milnet
