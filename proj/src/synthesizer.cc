// src/synthesizer.cc

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

#include "usvs/synthesizer.h"

namespace usvs {

SynthesizerImpl::SynthesizerImpl(const ModelConfig &model, const UncertaintyConfig &uncertainty)
    : config(model), mel(model) {
  posterior = register_module("posterior", PosteriorEncoder(model));
  prior = register_module("prior", PriorEncoder(model));
  decoder = register_module("decoder", Decoder(model));
  predictor = register_module("predictor", UncertaintyPredictor(uncertainty, model.latent_dim));
}

std::pair<torch::Tensor, GaussianParams> SynthesizerImpl::EncodePosterior(const torch::Tensor &wave,
                                                                         at::Generator &gen) {
  if (!torch::isfinite(wave).all().item<bool>()) throw std::invalid_argument("encode_posterior: non-finite waveform");
  GaussianParams q = posterior(mel(wave));
  return {Reparameterize(q, gen), q};
}

std::pair<torch::Tensor, GaussianParams> SynthesizerImpl::EncodePrior(const torch::Tensor &phonemes,
                                                                     const torch::Tensor &pitches,
                                                                     const torch::Tensor &z) {
  GaussianParams p = prior(phonemes, pitches);
  if (z.sizes() != p.mean.sizes())
    throw std::invalid_argument("encode_prior: z shape does not match [batch, latent_dim, frames]");
  return {p.mean + torch::exp(p.log_std) * z, p};
}

std::vector<double> SynthesizerImpl::Synthesize(const MusicScore &score, std::uint64_t seed) {
  torch::NoGradGuard no_grad;
  const bool was_training = is_training();
  eval();
  auto [ph, pitch] = FrameScoreTensors(RegulateLength(score, config.FrameRate()));
  at::Generator gen = at::detail::createCPUGenerator(seed);
  torch::Tensor z = torch::randn({1, config.latent_dim, ph.size(1)}, gen, torch::kFloat32);
  torch::Tensor wave = Decode(EncodePrior(ph, pitch, z).first).squeeze(0).to(torch::kFloat64).contiguous();
  train(was_training);
  return {wave.data_ptr<double>(), wave.data_ptr<double>() + wave.numel()};
}

}  // namespace usvs
