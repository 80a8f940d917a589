// include/usvs/discriminators.h

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

#ifndef USVS_DISCRIMINATORS_H_
#define USVS_DISCRIMINATORS_H_

#include <memory>
#include <vector>

#include <torch/torch.h>

#include "usvs/augment.h"
#include "usvs/config.h"

namespace usvs {

/// One discriminator split into a feature encoder Enc_D and a scoring head.
struct DiscriminatorComponent : torch::nn::Module {
  DiscriminatorComponent(DiscriminatorKind kind, int parameter) : kind(kind), parameter(parameter) {}
  /// wave [B, N] -> feature map.
  virtual FeatureMap Encode(const torch::Tensor &wave) = 0;
  /// feature map -> score map [B, 1, ...].
  virtual torch::Tensor Head(const FeatureMap &features) = 0;
  DiscriminatorKind kind;
  int parameter;  // FFT size, period or pooling scale
};

/// Spectrogram discriminator at one STFT resolution; features are
/// [B, C, freq, time].
struct MrsdComponent : DiscriminatorComponent {
  MrsdComponent(int n_fft, int channels);
  FeatureMap Encode(const torch::Tensor &wave) override;
  torch::Tensor Head(const FeatureMap &features) override;
  torch::nn::ModuleList convs;
  torch::nn::Conv2d head{nullptr};
  torch::Tensor window;
};

/// Period discriminator: the waveform folded to [B, 1, N/p, p]; features
/// [B, C, time, p].
struct MpdComponent : DiscriminatorComponent {
  MpdComponent(int period, int channels);
  FeatureMap Encode(const torch::Tensor &wave) override;
  torch::Tensor Head(const FeatureMap &features) override;
  torch::nn::ModuleList convs;
  torch::nn::Conv2d head{nullptr};
};

/// Scale discriminator on an average-pooled waveform; features [B, C, time]
/// with time = ceil(ceil(N / scale) / 16).
struct MsdComponent : DiscriminatorComponent {
  MsdComponent(int scale, int channels);
  FeatureMap Encode(const torch::Tensor &wave) override;
  torch::Tensor Head(const FeatureMap &features) override;
  torch::nn::ModuleList convs;
  torch::nn::Conv1d head{nullptr};
  static constexpr int kStrides[4] = {1, 4, 4, 1};
};

struct DiscriminatorOutput {
  FeatureMap features;  // after augmentation, i.e. what the head saw
  torch::Tensor score;
};

struct DiscriminatorBundleImpl : torch::nn::Module {
  explicit DiscriminatorBundleImpl(const ModelConfig &cfg);
  /// Enc_D per component, optional augmentation A, then the head. `plans`
  /// behaves as in AugmentFeatures.
  std::vector<DiscriminatorOutput> Discriminate(const torch::Tensor &wave, const AugmentConfig *augment,
                                                at::Generator *gen, std::vector<AugmentPlan> *plans = nullptr);
  std::vector<std::shared_ptr<DiscriminatorComponent>> components;
};
TORCH_MODULE(DiscriminatorBundle);

}  // namespace usvs

#endif  // USVS_DISCRIMINATORS_H_
