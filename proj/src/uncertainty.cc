// src/uncertainty.cc

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

#include "usvs/uncertainty.h"

#include <stdexcept>

namespace usvs {

namespace F = torch::nn::functional;

torch::Tensor InterpolationMatrix(long frames, long grid, torch::TensorOptions opts) {
  if (frames < 1 || grid < 1) throw std::invalid_argument("interpolation needs frames >= 1 and grid >= 1");
  torch::Tensor m = torch::zeros({frames, grid}, torch::kFloat64);
  auto a = m.accessor<double, 2>();
  for (long j = 0; j < grid; ++j) {
    const double pos = grid == 1 ? 0.0 : static_cast<double>(j) * (frames - 1) / (grid - 1);
    const long lo = std::min(static_cast<long>(pos), frames - 1);
    const long hi = std::min(lo + 1, frames - 1);
    const double w = pos - lo;
    a[lo][j] += 1.0 - w;
    a[hi][j] += w;
  }
  return m.to(opts.has_dtype() ? c10::typeMetaToScalarType(opts.dtype()) : torch::kFloat32);
}

torch::Tensor InterpolateToGrid(const torch::Tensor &latent, long grid) {
  return torch::matmul(latent, InterpolationMatrix(latent.size(2), grid, latent.options()));
}

UncertaintyPredictorImpl::UncertaintyPredictorImpl(const UncertaintyConfig &cfg, int latent_dim)
    : grid(cfg.grid_length) {
  const int pad = (cfg.kernel - 1) / 2;
  conv1 = register_module(
      "conv1", torch::nn::Conv1d(torch::nn::Conv1dOptions(latent_dim, cfg.channels, cfg.kernel).padding(pad)));
  conv2 = register_module(
      "conv2", torch::nn::Conv1d(torch::nn::Conv1dOptions(cfg.channels, cfg.channels, cfg.kernel).padding(pad)));
  proj = register_module("proj", torch::nn::Conv1d(cfg.channels, 1, 1));
}

torch::Tensor UncertaintyPredictorImpl::forward(const torch::Tensor &latent) {
  const auto act = F::LeakyReLUFuncOptions().negative_slope(0.1);
  torch::Tensor h = InterpolateToGrid(latent, grid);
  h = F::leaky_relu(conv1(h), act);
  h = F::leaky_relu(conv2(h), act);
  return proj(h).squeeze(1);
}

std::vector<long> IntervalBounds(long samples, long grid) {
  if (grid < 1) throw std::invalid_argument("grid must be >= 1");
  if (samples < grid)
    throw std::invalid_argument("target distance: " + std::to_string(samples) + " samples cannot fill " +
                                std::to_string(grid) + " intervals");
  const long n = samples / grid;
  std::vector<long> bounds(grid + 1);
  for (long t = 0; t < grid; ++t) bounds[t] = t * n;
  bounds[grid] = samples;
  return bounds;
}

torch::Tensor TargetDistance(const torch::Tensor &x, const torch::Tensor &z_hat, long grid) {
  if (x.dim() != 2 || z_hat.dim() != 2) throw std::invalid_argument("target distance: expected [batch, samples]");
  const long T = std::min(x.size(-1), z_hat.size(-1));
  const auto bounds = IntervalBounds(T, grid);
  torch::Tensor e = (x.narrow(-1, 0, T) - z_hat.narrow(-1, 0, T)).pow(2);
  const long n = T / grid;
  torch::Tensor head = e.narrow(-1, 0, n * (grid - 1)).reshape({e.size(0), grid - 1, n}).mean(-1);
  torch::Tensor tail = e.narrow(-1, n * (grid - 1), T - n * (grid - 1)).mean(-1, /*keepdim=*/true);
  return torch::cat({head, tail}, -1);
}

torch::Tensor UncertaintyLoss(const torch::Tensor &d, const torch::Tensor &u) {
  if (d.sizes() != u.sizes()) throw std::invalid_argument("uncertainty loss: d and u shapes differ");
  return (d - u).pow(2).mean();
}

}  // namespace usvs
