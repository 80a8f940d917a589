// src/discriminators.cc

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

#include "usvs/discriminators.h"

namespace usvs {

namespace F = torch::nn::functional;
using torch::nn::Conv1d;
using torch::nn::Conv1dOptions;
using torch::nn::Conv2d;
using torch::nn::Conv2dOptions;

namespace {

torch::Tensor Leaky(const torch::Tensor &x) { return F::leaky_relu(x, F::LeakyReLUFuncOptions().negative_slope(0.1)); }

template <typename ConvImpl>
torch::Tensor RunStack(const torch::nn::ModuleList &convs, torch::Tensor x) {
  for (const auto &c : *convs) x = Leaky(c->as<ConvImpl>()->forward(x));
  return x;
}

}  // namespace

MrsdComponent::MrsdComponent(int n_fft, int channels) : DiscriminatorComponent(DiscriminatorKind::kMrsd, n_fft) {
  convs = register_module("convs", torch::nn::ModuleList());
  convs->push_back(Conv2d(Conv2dOptions(1, channels, {9, 3}).padding({4, 1})));
  convs->push_back(Conv2d(Conv2dOptions(channels, channels, {9, 3}).stride({2, 1}).padding({4, 1})));
  convs->push_back(Conv2d(Conv2dOptions(channels, channels, {9, 3}).stride({2, 1}).padding({4, 1})));
  convs->push_back(Conv2d(Conv2dOptions(channels, channels, {3, 3}).padding({1, 1})));
  head = register_module("head", Conv2d(Conv2dOptions(channels, 1, {3, 3}).padding({1, 1})));
  window = register_buffer("window", torch::hann_window(n_fft, /*periodic=*/true));
}

FeatureMap MrsdComponent::Encode(const torch::Tensor &wave) {
  torch::Tensor spec = torch::stft(wave, parameter, parameter / 4, parameter, window.to(wave.dtype()), true,
                                   "constant", false, true, true);
  torch::Tensor x = torch::abs(spec).unsqueeze(1);  // [B, 1, freq, time]
  return {RunStack<torch::nn::Conv2dImpl>(convs, x), kind, /*time_axis=*/3, /*freq_axis=*/2};
}

torch::Tensor MrsdComponent::Head(const FeatureMap &f) { return head(f.values); }

MpdComponent::MpdComponent(int period, int channels) : DiscriminatorComponent(DiscriminatorKind::kMpd, period) {
  convs = register_module("convs", torch::nn::ModuleList());
  const int c2 = 2 * channels;
  convs->push_back(Conv2d(Conv2dOptions(1, channels, {5, 1}).stride({3, 1}).padding({2, 0})));
  convs->push_back(Conv2d(Conv2dOptions(channels, c2, {5, 1}).stride({3, 1}).padding({2, 0})));
  convs->push_back(Conv2d(Conv2dOptions(c2, c2, {5, 1}).stride({3, 1}).padding({2, 0})));
  convs->push_back(Conv2d(Conv2dOptions(c2, c2, {5, 1}).padding({2, 0})));
  head = register_module("head", Conv2d(Conv2dOptions(c2, 1, {3, 1}).padding({1, 0})));
}

FeatureMap MpdComponent::Encode(const torch::Tensor &wave) {
  const long n = wave.size(1);
  torch::Tensor x = wave.unsqueeze(1);
  if (n % parameter != 0) {
    const long pad = parameter - n % parameter;
    F::PadFuncOptions opts({0, pad});
    if (pad < n)
      opts.mode(torch::kReflect);
    else
      opts.mode(torch::kConstant);
    x = F::pad(x, opts);
  }
  x = x.view({x.size(0), 1, x.size(2) / parameter, parameter});
  return {RunStack<torch::nn::Conv2dImpl>(convs, x), kind, /*time_axis=*/2, /*freq_axis=*/-1};
}

torch::Tensor MpdComponent::Head(const FeatureMap &f) { return head(f.values); }

MsdComponent::MsdComponent(int scale, int channels) : DiscriminatorComponent(DiscriminatorKind::kMsd, scale) {
  convs = register_module("convs", torch::nn::ModuleList());
  const int c2 = 2 * channels, c4 = 4 * channels;
  convs->push_back(Conv1d(Conv1dOptions(1, channels, 15).stride(kStrides[0]).padding(7)));
  convs->push_back(Conv1d(Conv1dOptions(channels, c2, 41).stride(kStrides[1]).padding(20).groups(4)));
  convs->push_back(Conv1d(Conv1dOptions(c2, c4, 41).stride(kStrides[2]).padding(20).groups(16)));
  convs->push_back(Conv1d(Conv1dOptions(c4, c4, 5).stride(kStrides[3]).padding(2)));
  head = register_module("head", Conv1d(Conv1dOptions(c4, 1, 3).padding(1)));
}

FeatureMap MsdComponent::Encode(const torch::Tensor &wave) {
  torch::Tensor x = wave.unsqueeze(1);
  if (parameter > 1)
    x = F::avg_pool1d(x, F::AvgPool1dFuncOptions(parameter).stride(parameter).ceil_mode(true));
  return {RunStack<torch::nn::Conv1dImpl>(convs, x), kind, /*time_axis=*/2, /*freq_axis=*/-1};
}

torch::Tensor MsdComponent::Head(const FeatureMap &f) { return head(f.values); }

DiscriminatorBundleImpl::DiscriminatorBundleImpl(const ModelConfig &cfg) {
  auto add = [&](const std::string &name, std::shared_ptr<DiscriminatorComponent> c) {
    components.push_back(register_module(name, c));
  };
  for (int n : cfg.mrsd_fft_sizes) add("mrsd_" + std::to_string(n), std::make_shared<MrsdComponent>(n, cfg.disc_channels));
  for (int p : cfg.mpd_periods) add("mpd_" + std::to_string(p), std::make_shared<MpdComponent>(p, cfg.disc_channels));
  for (int s : cfg.msd_scales) add("msd_" + std::to_string(s), std::make_shared<MsdComponent>(s, cfg.disc_channels));
}

std::vector<DiscriminatorOutput> DiscriminatorBundleImpl::Discriminate(const torch::Tensor &wave,
                                                                       const AugmentConfig *augment,
                                                                       at::Generator *gen,
                                                                       std::vector<AugmentPlan> *plans) {
  std::vector<FeatureMap> features;
  features.reserve(components.size());
  for (auto &c : components) features.push_back(c->Encode(wave));
  if (augment != nullptr && augment->enabled) {
    if (gen == nullptr) throw std::invalid_argument("discriminate: augmentation needs a generator");
    features = AugmentFeatures(features, *augment, *gen, plans);
  }
  std::vector<DiscriminatorOutput> out;
  out.reserve(components.size());
  for (std::size_t i = 0; i < components.size(); ++i)
    out.push_back({features[i], components[i]->Head(features[i])});
  return out;
}

}  // namespace usvs
