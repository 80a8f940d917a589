// include/usvs/synthesizer.h

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

#ifndef USVS_SYNTHESIZER_H_
#define USVS_SYNTHESIZER_H_

#include <utility>
#include <vector>

#include <torch/torch.h>

#include "usvs/config.h"
#include "usvs/corpus.h"
#include "usvs/model.h"
#include "usvs/uncertainty.h"

namespace usvs {

/// Generator side of the CVAE: posterior encoder, prior encoder, the shared
/// decoder and the uncertainty predictor g.
struct SynthesizerImpl : torch::nn::Module {
  SynthesizerImpl(const ModelConfig &model, const UncertaintyConfig &uncertainty);

  /// x [B, N] -> (l_x, q_post), frames = 1 + N / hop.
  std::pair<torch::Tensor, GaussianParams> EncodePosterior(const torch::Tensor &wave, at::Generator &gen);
  /// (l_z = mu + sigma * z, q_pri); z must match the prior mean shape.
  std::pair<torch::Tensor, GaussianParams> EncodePrior(const torch::Tensor &phonemes, const torch::Tensor &pitches,
                                                       const torch::Tensor &z);
  torch::Tensor Decode(const torch::Tensor &latent) { return decoder(latent); }

  /// Score -> waveform through the prior path with z drawn from `seed`.
  std::vector<double> Synthesize(const MusicScore &score, std::uint64_t seed);

  ModelConfig config;
  MelExtractor mel;
  PosteriorEncoder posterior{nullptr};
  PriorEncoder prior{nullptr};
  Decoder decoder{nullptr};
  UncertaintyPredictor predictor{nullptr};
};
TORCH_MODULE(Synthesizer);

}  // namespace usvs

#endif  // USVS_SYNTHESIZER_H_
