// include/usvs/losses.h

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

#ifndef USVS_LOSSES_H_
#define USVS_LOSSES_H_

#include <utility>
#include <vector>

#include <torch/torch.h>

#include "usvs/config.h"
#include "usvs/discriminators.h"
#include "usvs/model.h"

namespace usvs {

/// Closed-form KL(q_post || q_pri) per element, averaged.
torch::Tensor KlLoss(const GaussianParams &posterior, const GaussianParams &prior);

/// Mean absolute difference of two log-mel tensors (trimmed to the shorter
/// time axis).
torch::Tensor MelL1(const torch::Tensor &mel_a, const torch::Tensor &mel_b);

/// MelL1(Mel(x), Mel(x_hat)) with waveforms trimmed to the shorter length.
torch::Tensor ReconstructionLoss(const MelExtractor &mel, const torch::Tensor &x, const torch::Tensor &x_hat);

/// (L_D, L_G); each score tensor is averaged over its map, then over
/// components.
std::pair<torch::Tensor, torch::Tensor> AdversarialLosses(const std::vector<torch::Tensor> &real_scores,
                                                          const std::vector<torch::Tensor> &fake_scores,
                                                          AdversarialForm form);

/// Mean L1 between paired feature maps (zero-weight by default).
torch::Tensor FeatureMatchingLoss(const std::vector<DiscriminatorOutput> &real,
                                  const std::vector<DiscriminatorOutput> &fake);

std::vector<torch::Tensor> Scores(const std::vector<DiscriminatorOutput> &outputs);

}  // namespace usvs

#endif  // USVS_LOSSES_H_
