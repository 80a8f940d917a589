// include/usvs/model.h

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

#ifndef USVS_MODEL_H_
#define USVS_MODEL_H_

#include <optional>
#include <vector>

#include <torch/torch.h>

#include "usvs/config.h"
#include "usvs/corpus.h"

namespace usvs {

/// Frame-level Gaussian, both tensors laid out [batch, latent_dim, frames].
struct GaussianParams {
  torch::Tensor mean;
  torch::Tensor log_std;
};

/// mean + exp(log_std) * eps with eps drawn from `gen`.
torch::Tensor Reparameterize(const GaussianParams &p, at::Generator &gen);

/// Log-mel front end matching dsp::LogMel (periodic Hann, zero centre padding,
/// HTK filterbank, log(x + 1e-5)), differentiable. [B, N] -> [B, n_mels, 1 + N/hop].
class MelExtractor {
 public:
  explicit MelExtractor(const ModelConfig &cfg);
  torch::Tensor operator()(const torch::Tensor &wave) const;

 private:
  int n_fft_, hop_, win_;
  torch::Tensor window_;      // [n_fft]
  torch::Tensor filterbank_;  // [n_mels, n_fft/2+1]
};

/// Phoneme and pitch ids per frame. Each note covers floor(duration * frame_rate)
/// frames; remainders are dropped.
struct FrameScore {
  std::vector<std::int64_t> phonemes;
  std::vector<std::int64_t> pitches;
  std::size_t size() const { return phonemes.size(); }
};
FrameScore RegulateLength(const MusicScore &score, double frame_rate);
/// Throws std::invalid_argument if the score expands to zero frames.
std::pair<torch::Tensor, torch::Tensor> FrameScoreTensors(const FrameScore &fs);

// Weight-normalized convolutions (weight = g * v / ||v|| per output channel).
struct WNConv1dImpl : torch::nn::Module {
  WNConv1dImpl(int in, int out, int kernel, int stride = 1, int dilation = 1, int padding = -1,
               int groups = 1);
  torch::Tensor forward(const torch::Tensor &x);
  torch::Tensor Weight() const;
  torch::Tensor v, g, bias;
  int stride, dilation, padding, groups;
};
TORCH_MODULE(WNConv1d);

struct WNConvTranspose1dImpl : torch::nn::Module {
  WNConvTranspose1dImpl(int in, int out, int kernel, int stride, int padding);
  torch::Tensor forward(const torch::Tensor &x);
  torch::Tensor v, g, bias;
  int stride, padding;
};
TORCH_MODULE(WNConvTranspose1d);

struct PosteriorEncoderImpl : torch::nn::Module {
  explicit PosteriorEncoderImpl(const ModelConfig &cfg);
  /// mel [B, n_mels, T] -> Gaussian over [B, latent_dim, T].
  GaussianParams forward(const torch::Tensor &mel);
  torch::nn::ModuleList layers;
  WNConv1d proj{nullptr};
  /// Test hook: replaces log_std with this constant when set.
  std::optional<double> force_log_std;
};
TORCH_MODULE(PosteriorEncoder);

/// Shaw-style relative-position multi-head self-attention with clipped
/// distances (keys and values).
struct RelativeAttentionImpl : torch::nn::Module {
  RelativeAttentionImpl(int channels, int heads, int window);
  torch::Tensor forward(const torch::Tensor &x);  // [B, C, T]
  torch::nn::Conv1d q{nullptr}, k{nullptr}, v{nullptr}, o{nullptr};
  torch::Tensor rel_k, rel_v;  // [2w+1, head_dim]
  int heads, window;
};
TORCH_MODULE(RelativeAttention);

struct PriorEncoderImpl : torch::nn::Module {
  explicit PriorEncoderImpl(const ModelConfig &cfg);
  /// phonemes, pitches [B, T] int64 -> Gaussian over [B, latent_dim, T].
  GaussianParams forward(const torch::Tensor &phonemes, const torch::Tensor &pitches);
  torch::nn::Embedding phoneme_embedding{nullptr}, pitch_embedding{nullptr};
  torch::nn::ModuleList attention, ffn_in, ffn_out, norm1, norm2;
  torch::nn::Conv1d proj{nullptr};
  int hidden;
};
TORCH_MODULE(PriorEncoder);

struct ResBlockImpl : torch::nn::Module {
  ResBlockImpl(int channels, int kernel, const std::vector<int> &dilations);
  torch::Tensor forward(torch::Tensor x);
  torch::nn::ModuleList convs;
};
TORCH_MODULE(ResBlock);

/// Latent [B, D, T] -> waveform [B, T * hop] in (-1, 1).
struct DecoderImpl : torch::nn::Module {
  explicit DecoderImpl(const ModelConfig &cfg);
  torch::Tensor forward(const torch::Tensor &latent);
  WNConv1d conv_pre{nullptr}, conv_post{nullptr};
  torch::nn::ModuleList ups, blocks;
};
TORCH_MODULE(Decoder);

}  // namespace usvs

#endif  // USVS_MODEL_H_
