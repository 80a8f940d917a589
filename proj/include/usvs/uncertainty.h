// include/usvs/uncertainty.h

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

#ifndef USVS_UNCERTAINTY_H_
#define USVS_UNCERTAINTY_H_

#include <torch/torch.h>

#include "usvs/config.h"

namespace usvs {

/// [frames, L] matrix mapping a frame sequence onto an L-point grid by linear
/// interpolation with both end points aligned.
torch::Tensor InterpolationMatrix(long frames, long grid, torch::TensorOptions opts = {});

/// [B, D, F] -> [B, D, L].
torch::Tensor InterpolateToGrid(const torch::Tensor &latent, long grid);

/// g(l_z): interpolate to the grid, two 1-D conv layers, scalar projection.
struct UncertaintyPredictorImpl : torch::nn::Module {
  UncertaintyPredictorImpl(const UncertaintyConfig &cfg, int latent_dim);
  /// l_z [B, D, F] -> u [B, L].
  torch::Tensor forward(const torch::Tensor &latent);
  torch::nn::Conv1d conv1{nullptr}, conv2{nullptr}, proj{nullptr};
  int grid;
};
TORCH_MODULE(UncertaintyPredictor);

/// Per-interval mean squared error between x and z_hat, both [B, T] (trimmed
/// to the shorter). Intervals hold floor(T/L) samples, the tail is folded into
/// the last one. Throws if T < L.
torch::Tensor TargetDistance(const torch::Tensor &x, const torch::Tensor &z_hat, long grid);

/// Interval boundaries used by TargetDistance: L+1 offsets.
std::vector<long> IntervalBounds(long samples, long grid);

/// mean over grid steps (and batch) of (d - u)^2.
torch::Tensor UncertaintyLoss(const torch::Tensor &d, const torch::Tensor &u);

}  // namespace usvs

#endif  // USVS_UNCERTAINTY_H_
