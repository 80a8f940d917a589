// src/checkpoint.cc

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

#include "usvs/checkpoint.h"

#include <cstring>
#include <fstream>
#include <stdexcept>
#include <unistd.h>

namespace usvs {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr char kMagic[8] = {'U', 'S', 'V', 'S', 'C', 'K', 'P', 'T'};

std::string DtypeName(torch::ScalarType t) {
  switch (t) {
    case torch::kFloat32: return "float32";
    case torch::kFloat64: return "float64";
    case torch::kInt64: return "int64";
    case torch::kUInt8: return "uint8";
    default: throw std::invalid_argument(std::string("checkpoint: unsupported dtype ") + c10::toString(t));
  }
}

torch::ScalarType ParseDtype(const std::string &s) {
  if (s == "float32") return torch::kFloat32;
  if (s == "float64") return torch::kFloat64;
  if (s == "int64") return torch::kInt64;
  if (s == "uint8") return torch::kUInt8;
  throw std::runtime_error("checkpoint: unknown dtype '" + s + "'");
}

void PutU64(std::ostream &os, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  os.write(reinterpret_cast<const char *>(b), 8);
}

std::uint64_t GetU64(std::istream &is) {
  unsigned char b[8];
  is.read(reinterpret_cast<char *>(b), 8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

}  // namespace

const torch::Tensor &CheckpointData::Get(const std::string &name) const {
  for (const auto &[n, t] : tensors)
    if (n == name) return t;
  throw std::runtime_error("checkpoint: missing tensor '" + name + "'");
}

bool CheckpointData::Has(const std::string &name) const {
  for (const auto &[n, t] : tensors)
    if (n == name) return true;
  return false;
}

void SaveCheckpoint(const fs::path &path, const CheckpointData &data) {
  json entries = json::array();
  std::vector<torch::Tensor> blobs;
  std::uint64_t offset = 0;
  for (const auto &[name, tensor] : data.tensors) {
    torch::Tensor t = tensor.detach().contiguous().cpu();
    const std::uint64_t nbytes = t.numel() * t.element_size();
    entries.push_back({{"name", name},
                       {"dtype", DtypeName(t.scalar_type())},
                       {"shape", t.sizes().vec()},
                       {"offset", offset},
                       {"nbytes", nbytes}});
    offset += nbytes;
    blobs.push_back(t);
  }
  const std::string index = json{{"tensors", entries}, {"metadata", data.metadata}}.dump();

  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp" + std::to_string(::getpid());
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot write checkpoint " + tmp.string());
    os.write(kMagic, sizeof(kMagic));
    PutU64(os, index.size());
    os.write(index.data(), static_cast<std::streamsize>(index.size()));
    for (const auto &t : blobs)
      os.write(static_cast<const char *>(t.data_ptr()), static_cast<std::streamsize>(t.numel() * t.element_size()));
    os.flush();
    if (!os) throw std::runtime_error("failed writing checkpoint " + tmp.string());
  }
  fs::rename(tmp, path);
}

CheckpointData LoadCheckpoint(const fs::path &path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open checkpoint " + path.string());
  char magic[8];
  is.read(magic, 8);
  if (!is || std::memcmp(magic, kMagic, 8) != 0)
    throw std::runtime_error(path.string() + " is not a usvs checkpoint");
  const std::uint64_t len = GetU64(is);
  std::string index(len, '\0');
  is.read(index.data(), static_cast<std::streamsize>(len));
  if (!is) throw std::runtime_error("checkpoint " + path.string() + ": truncated index");
  const json j = json::parse(index);
  const std::streamoff base = is.tellg();

  CheckpointData data;
  data.metadata = j.at("metadata");
  for (const auto &e : j.at("tensors")) {
    const auto shape = e.at("shape").get<std::vector<int64_t>>();
    torch::Tensor t = torch::empty(shape, ParseDtype(e.at("dtype")));
    const auto nbytes = e.at("nbytes").get<std::uint64_t>();
    if (nbytes != static_cast<std::uint64_t>(t.numel() * t.element_size()))
      throw std::runtime_error("checkpoint: size mismatch for " + e.at("name").get<std::string>());
    is.seekg(base + static_cast<std::streamoff>(e.at("offset").get<std::uint64_t>()));
    is.read(static_cast<char *>(t.data_ptr()), static_cast<std::streamsize>(nbytes));
    if (!is) throw std::runtime_error("checkpoint " + path.string() + ": truncated data");
    data.Add(e.at("name"), t);
  }
  return data;
}

}  // namespace usvs
