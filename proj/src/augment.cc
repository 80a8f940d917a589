// src/augment.cc

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

#include "usvs/augment.h"

#include <cmath>
#include <stdexcept>

namespace usvs {

std::string DiscriminatorKindName(DiscriminatorKind k) {
  switch (k) {
    case DiscriminatorKind::kMrsd: return "MRSD";
    case DiscriminatorKind::kMpd: return "MPD";
    case DiscriminatorKind::kMsd: return "MSD";
  }
  return "?";
}

MaskSpec SampleInterval(long extent, double ratio, at::Generator &gen, MaskAxis axis) {
  if (extent < 1) throw std::invalid_argument("sample_interval: extent must be >= 1");
  if (!(ratio > 0.0 && ratio < 1.0)) throw std::invalid_argument("sample_interval: ratio must be in (0,1)");
  MaskSpec spec;
  spec.axis = axis;
  spec.length = static_cast<long>(std::floor(static_cast<double>(extent) * ratio));
  if (spec.length == 0) return spec;
  spec.start = torch::randint(0, extent - spec.length + 1, {1}, gen, torch::kInt64).item<long>();
  return spec;
}

namespace {

void CheckBounds(const torch::Tensor &values, int dim, const MaskSpec &spec) {
  if (dim < 0 || dim >= values.dim()) throw std::invalid_argument("augment: axis out of range");
  const long extent = values.size(dim);
  if (spec.start < 0 || spec.length < 0 || spec.start + spec.length > extent)
    throw std::invalid_argument("augment: interval [" + std::to_string(spec.start) + ", " +
                                std::to_string(spec.start + spec.length) + ") exceeds extent " +
                                std::to_string(extent));
}

}  // namespace

torch::Tensor ApplyMask(const torch::Tensor &values, int dim, const MaskSpec &spec, double v) {
  CheckBounds(values, dim, spec);
  if (spec.empty()) return values;
  const long extent = values.size(dim);
  torch::Tensor b = torch::ones({extent}, values.options());
  b.narrow(0, spec.start, spec.length).fill_(v);
  std::vector<long> shape(values.dim(), 1);
  shape[dim] = extent;
  return values * b.view(shape);
}

torch::Tensor AddNoise(const torch::Tensor &values, int dim, const MaskSpec &spec, double alpha,
                       at::Generator &gen) {
  CheckBounds(values, dim, spec);
  if (spec.empty() || alpha == 0.0) return values;
  const long extent = values.size(dim);
  torch::Tensor mid = values.narrow(dim, spec.start, spec.length);
  mid = mid + alpha * torch::randn(mid.sizes(), gen, values.options());
  // Stitch the noisy interval back between the untouched pieces.
  return torch::cat({values.narrow(dim, 0, spec.start), mid,
                     values.narrow(dim, spec.start + spec.length, extent - spec.start - spec.length)},
                    dim);
}

FeatureMap MaskTemporal(const FeatureMap &f, const MaskSpec &spec, double v) {
  if (spec.axis != MaskAxis::kTime) throw std::invalid_argument("mask_temporal: spec is not along time");
  FeatureMap out = f;
  out.values = ApplyMask(f.values, f.time_axis, spec, v);
  return out;
}

FeatureMap MaskFrequency(const FeatureMap &f, const MaskSpec &spec, double v) {
  if (!f.has_frequency()) throw std::invalid_argument("mask_frequency: feature map has no frequency axis");
  if (spec.axis != MaskAxis::kFrequency)
    throw std::invalid_argument("mask_frequency: spec is not along frequency");
  FeatureMap out = f;
  out.values = ApplyMask(f.values, f.freq_axis, spec, v);
  return out;
}

FeatureMap AddIntervalNoise(const FeatureMap &f, const MaskSpec &spec, double alpha, at::Generator &gen) {
  if (spec.axis != MaskAxis::kTime) throw std::invalid_argument("add_interval_noise: spec is not along time");
  FeatureMap out = f;
  out.values = AddNoise(f.values, f.time_axis, spec, alpha, gen);
  return out;
}

AugmentPlan SampleAugmentPlan(const FeatureMap &f, const AugmentConfig &cfg, at::Generator &gen) {
  AugmentPlan plan;
  if (cfg.mode != AugmentMode::kNoise) {
    plan.mask = f.kind == DiscriminatorKind::kMrsd
                    ? SampleInterval(f.values.size(f.freq_axis), cfg.ratio, gen, MaskAxis::kFrequency)
                    : SampleInterval(f.TimeExtent(), cfg.ratio, gen, MaskAxis::kTime);
  }
  if (cfg.mode != AugmentMode::kMask) plan.noise = SampleInterval(f.TimeExtent(), cfg.ratio, gen, MaskAxis::kTime);
  return plan;
}

FeatureMap ApplyAugmentPlan(const FeatureMap &f, const AugmentPlan &plan, const AugmentConfig &cfg,
                            at::Generator &gen) {
  FeatureMap out = f;
  if (cfg.mode != AugmentMode::kNoise)
    out = plan.mask.axis == MaskAxis::kFrequency ? MaskFrequency(out, plan.mask, cfg.mask_value)
                                                 : MaskTemporal(out, plan.mask, cfg.mask_value);
  if (cfg.mode != AugmentMode::kMask) {
    double alpha = cfg.noise_scale;
    if (cfg.relative_to_std && alpha != 0.0) alpha *= f.values.detach().std().item<double>();
    out = AddIntervalNoise(out, plan.noise, alpha, gen);
  }
  return out;
}

std::vector<FeatureMap> AugmentFeatures(const std::vector<FeatureMap> &features, const AugmentConfig &cfg,
                                        at::Generator &gen, std::vector<AugmentPlan> *plans) {
  const bool reuse = plans != nullptr && !plans->empty();
  if (reuse && plans->size() != features.size())
    throw std::invalid_argument("augment: stored plans do not match the number of feature maps");
  std::vector<FeatureMap> out;
  out.reserve(features.size());
  for (std::size_t i = 0; i < features.size(); ++i) {
    AugmentPlan plan = reuse ? (*plans)[i] : SampleAugmentPlan(features[i], cfg, gen);
    if (plans != nullptr && !reuse) plans->push_back(plan);
    out.push_back(ApplyAugmentPlan(features[i], plan, cfg, gen));
  }
  return out;
}

}  // namespace usvs
