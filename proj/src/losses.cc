// src/losses.cc

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

#include "usvs/losses.h"

#include <stdexcept>

namespace usvs {

torch::Tensor KlLoss(const GaussianParams &q, const GaussianParams &p) {
  if (q.mean.sizes() != p.mean.sizes() || q.log_std.sizes() != p.log_std.sizes() ||
      q.mean.sizes() != q.log_std.sizes())
    throw std::invalid_argument("kl_loss: posterior and prior shapes differ");
  torch::Tensor kl = p.log_std - q.log_std +
                     (torch::exp(2.0 * q.log_std) + (q.mean - p.mean).pow(2)) / (2.0 * torch::exp(2.0 * p.log_std)) -
                     0.5;
  return kl.mean();
}

torch::Tensor MelL1(const torch::Tensor &a, const torch::Tensor &b) {
  const long frames = std::min(a.size(-1), b.size(-1));
  if (frames == 0) throw std::invalid_argument("reconstruction_loss: empty overlap");
  return torch::abs(a.narrow(-1, 0, frames) - b.narrow(-1, 0, frames)).mean();
}

torch::Tensor ReconstructionLoss(const MelExtractor &mel, const torch::Tensor &x, const torch::Tensor &x_hat) {
  const long n = std::min(x.size(-1), x_hat.size(-1));
  if (n == 0) throw std::invalid_argument("reconstruction_loss: empty overlap");
  return MelL1(mel(x.narrow(-1, 0, n)), mel(x_hat.narrow(-1, 0, n)));
}

std::pair<torch::Tensor, torch::Tensor> AdversarialLosses(const std::vector<torch::Tensor> &real,
                                                          const std::vector<torch::Tensor> &fake,
                                                          AdversarialForm form) {
  if (real.empty() || fake.empty()) throw std::invalid_argument("adversarial_losses: empty score list");
  if (real.size() != fake.size()) throw std::invalid_argument("adversarial_losses: list sizes differ");
  torch::Tensor ld = torch::zeros({}, real[0].options());
  torch::Tensor lg = torch::zeros({}, fake[0].options());
  for (std::size_t i = 0; i < real.size(); ++i) {
    if (form == AdversarialForm::kLiteral) {
      ld = ld + (1.0 - real[i]).mean() + fake[i].mean();
      lg = lg - fake[i].mean();
    } else {
      ld = ld + (1.0 - real[i]).pow(2).mean() + fake[i].pow(2).mean();
      lg = lg + (1.0 - fake[i]).pow(2).mean();
    }
  }
  const double n = static_cast<double>(real.size());
  return {ld / n, lg / n};
}

torch::Tensor FeatureMatchingLoss(const std::vector<DiscriminatorOutput> &real,
                                  const std::vector<DiscriminatorOutput> &fake) {
  if (real.size() != fake.size() || real.empty())
    throw std::invalid_argument("feature_matching: mismatched outputs");
  torch::Tensor loss = torch::zeros({}, fake[0].features.values.options());
  for (std::size_t i = 0; i < real.size(); ++i)
    loss = loss + torch::abs(real[i].features.values.detach() - fake[i].features.values).mean();
  return loss / static_cast<double>(real.size());
}

std::vector<torch::Tensor> Scores(const std::vector<DiscriminatorOutput> &outputs) {
  std::vector<torch::Tensor> s;
  s.reserve(outputs.size());
  for (const auto &o : outputs) s.push_back(o.score);
  return s;
}

}  // namespace usvs
