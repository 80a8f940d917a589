// include/usvs/checkpoint.h

// Copyright 2026  The usvs Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef USVS_CHECKPOINT_H_
#define USVS_CHECKPOINT_H_

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <torch/torch.h>

#include "json.hpp"

namespace usvs {

// File layout:
//   "USVSCKPT"            8 bytes
//   index length          uint64 little endian
//   index                 JSON: {"tensors": [{"name", "dtype", "shape", "offset",
//                         "nbytes"}...], "metadata": {...}}
//   data                  raw contiguous tensor bytes, offsets relative to here
struct CheckpointData {
  std::vector<std::pair<std::string, torch::Tensor>> tensors;
  nlohmann::json metadata;

  void Add(const std::string &name, const torch::Tensor &t) { tensors.emplace_back(name, t); }
  /// Throws std::runtime_error if missing.
  const torch::Tensor &Get(const std::string &name) const;
  bool Has(const std::string &name) const;
};

/// Writes to a temporary file in the same directory, then renames.
void SaveCheckpoint(const std::filesystem::path &path, const CheckpointData &data);
CheckpointData LoadCheckpoint(const std::filesystem::path &path);

}  // namespace usvs

#endif  // USVS_CHECKPOINT_H_
