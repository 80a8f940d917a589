// include/usvs/augment.h

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

#ifndef USVS_AUGMENT_H_
#define USVS_AUGMENT_H_

#include <vector>

#include <torch/torch.h>

#include "usvs/config.h"

namespace usvs {

enum class DiscriminatorKind { kMrsd, kMpd, kMsd };
std::string DiscriminatorKindName(DiscriminatorKind k);

/// Discriminator encoder output. values is [B, C, ...]; time_axis indexes the
/// time dimension of values and freq_axis (MRSD only) the frequency one.
struct FeatureMap {
  torch::Tensor values;
  DiscriminatorKind kind = DiscriminatorKind::kMsd;
  int time_axis = 2;
  int freq_axis = -1;
  bool has_frequency() const { return freq_axis >= 0; }
  long TimeExtent() const { return values.size(time_axis); }
};

enum class MaskAxis { kTime, kFrequency };

/// Half-open interval [start, start + length) along one axis; length 0 means
/// "no augmentation".
struct MaskSpec {
  MaskAxis axis = MaskAxis::kTime;
  long start = 0;
  long length = 0;
  bool empty() const { return length == 0; }
  bool operator==(const MaskSpec &) const = default;
};

/// length = floor(extent * r); start uniform over [0, extent - length].
MaskSpec SampleInterval(long extent, double ratio, at::Generator &gen, MaskAxis axis = MaskAxis::kTime);

/// Scales positions inside the interval by v along `dim` of `values`.
torch::Tensor ApplyMask(const torch::Tensor &values, int dim, const MaskSpec &spec, double v);
torch::Tensor AddNoise(const torch::Tensor &values, int dim, const MaskSpec &spec, double alpha,
                       at::Generator &gen);

FeatureMap MaskTemporal(const FeatureMap &f, const MaskSpec &spec, double v);
/// Throws std::invalid_argument if f has no frequency axis.
FeatureMap MaskFrequency(const FeatureMap &f, const MaskSpec &spec, double v);
/// Adds alpha * N(0,1) inside the interval; elements outside are copied
/// unchanged.
FeatureMap AddIntervalNoise(const FeatureMap &f, const MaskSpec &spec, double alpha, at::Generator &gen);

/// Intervals drawn for one feature map in one pass.
struct AugmentPlan {
  MaskSpec mask;   // frequency for MRSD, time otherwise
  MaskSpec noise;  // always time
};

AugmentPlan SampleAugmentPlan(const FeatureMap &f, const AugmentConfig &cfg, at::Generator &gen);
FeatureMap ApplyAugmentPlan(const FeatureMap &f, const AugmentPlan &plan, const AugmentConfig &cfg,
                            at::Generator &gen);

/// Routes each map by kind: mask mode masks frequency on MRSD and time on
/// MPD/MSD, noise mode adds interval noise along time, mask+noise does both in
/// that order. A fresh interval is drawn per map. If `plans` is non-null and
/// non-empty those intervals are reused, otherwise the drawn ones are stored.
std::vector<FeatureMap> AugmentFeatures(const std::vector<FeatureMap> &features, const AugmentConfig &cfg,
                                        at::Generator &gen, std::vector<AugmentPlan> *plans = nullptr);

}  // namespace usvs

#endif  // USVS_AUGMENT_H_
