// src/model.cc

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

#include "usvs/model.h"

#include <cmath>

#include "usvs/dsp.h"

namespace usvs {

namespace F = torch::nn::functional;

namespace {

constexpr double kLeakySlope = 0.1;
// Fixed affine normalization of log-mel input (log(1e-5) is about -11.5).
constexpr double kMelOffset = -5.0;
constexpr double kMelScale = 4.0;

torch::Tensor Leaky(const torch::Tensor &x) { return F::leaky_relu(x, F::LeakyReLUFuncOptions().negative_slope(kLeakySlope)); }

torch::Tensor ToTensor(const dsp::Matrix &m) {
  torch::Tensor t = torch::empty({m.rows(), m.cols()}, torch::kFloat64);
  std::copy(m.data(), m.data() + m.size(), t.data_ptr<double>());
  return t.to(torch::kFloat32);
}

}  // namespace

torch::Tensor Reparameterize(const GaussianParams &p, at::Generator &gen) {
  torch::Tensor eps = torch::randn(p.mean.sizes(), gen, p.mean.options());
  return p.mean + torch::exp(p.log_std) * eps;
}

MelExtractor::MelExtractor(const ModelConfig &cfg)
    : n_fft_(cfg.n_fft), hop_(cfg.hop_length), win_(cfg.win_length) {
  const auto w = dsp::HannWindow(cfg.n_fft, cfg.win_length);
  window_ = torch::tensor(w, torch::kFloat64).to(torch::kFloat32);
  filterbank_ =
      ToTensor(dsp::MelFilterbank(cfg.n_fft, cfg.sample_rate, cfg.n_mels, 0.0, 0.5 * cfg.sample_rate));
}

torch::Tensor MelExtractor::operator()(const torch::Tensor &wave) const {
  if (wave.dim() != 2) throw std::invalid_argument("mel: expected [batch, samples]");
  if (wave.size(1) < win_) throw std::invalid_argument("mel: waveform shorter than the analysis window");
  const auto dtype = wave.scalar_type();
  torch::Tensor spec = torch::stft(wave, n_fft_, hop_, n_fft_, window_.to(dtype), /*center=*/true, "constant",
                                   /*normalized=*/false, /*onesided=*/true, /*return_complex=*/true);
  torch::Tensor mag = torch::abs(spec);  // [B, bins, frames]
  const long frames = 1 + wave.size(1) / hop_;
  mag = mag.narrow(2, 0, frames);
  return torch::log(torch::matmul(filterbank_.to(dtype), mag) + dsp::kLogMelEpsilon);
}

FrameScore RegulateLength(const MusicScore &score, double frame_rate) {
  FrameScore fs;
  for (std::size_t i = 0; i < score.size(); ++i) {
    const int id = PhonemeId(score.phonemes[i]);
    if (id < 0) throw std::invalid_argument("unknown phoneme '" + score.phonemes[i] + "'");
    const long n = static_cast<long>(std::floor(score.durations[i] * frame_rate + 1e-6));
    for (long k = 0; k < n; ++k) {
      fs.phonemes.push_back(id);
      fs.pitches.push_back(score.pitches[i]);
    }
  }
  return fs;
}

std::pair<torch::Tensor, torch::Tensor> FrameScoreTensors(const FrameScore &fs) {
  if (fs.size() == 0) throw std::invalid_argument("score expands to zero frames");
  const long n = static_cast<long>(fs.size());
  return {torch::tensor(fs.phonemes, torch::kInt64).view({1, n}),
          torch::tensor(fs.pitches, torch::kInt64).view({1, n})};
}

WNConv1dImpl::WNConv1dImpl(int in, int out, int kernel, int stride_, int dilation_, int padding_, int groups_)
    : stride(stride_),
      dilation(dilation_),
      padding(padding_ < 0 ? dilation_ * (kernel - 1) / 2 : padding_),
      groups(groups_) {
  torch::nn::Conv1d init(torch::nn::Conv1dOptions(in, out, kernel).groups(groups_));
  v = register_parameter("v", init->weight.detach().clone());
  g = register_parameter("g", torch::norm_except_dim(v, 2, 0).detach().clone());
  bias = register_parameter("bias", init->bias.detach().clone());
}

torch::Tensor WNConv1dImpl::Weight() const { return torch::_weight_norm(v, g, 0); }

torch::Tensor WNConv1dImpl::forward(const torch::Tensor &x) {
  return torch::conv1d(x, Weight(), bias, stride, padding, dilation, groups);
}

WNConvTranspose1dImpl::WNConvTranspose1dImpl(int in, int out, int kernel, int stride_, int padding_)
    : stride(stride_), padding(padding_) {
  torch::nn::ConvTranspose1d init(torch::nn::ConvTranspose1dOptions(in, out, kernel));
  v = register_parameter("v", init->weight.detach().clone());
  g = register_parameter("g", torch::norm_except_dim(v, 2, 0).detach().clone());
  bias = register_parameter("bias", init->bias.detach().clone());
}

torch::Tensor WNConvTranspose1dImpl::forward(const torch::Tensor &x) {
  return torch::conv_transpose1d(x, torch::_weight_norm(v, g, 0), bias, stride, padding);
}

PosteriorEncoderImpl::PosteriorEncoderImpl(const ModelConfig &cfg) {
  layers = register_module("layers", torch::nn::ModuleList());
  for (int i = 0; i < cfg.posterior_layers; ++i)
    layers->push_back(WNConv1d(i == 0 ? cfg.n_mels : cfg.posterior_channels, cfg.posterior_channels,
                               cfg.posterior_kernel));
  proj = register_module("proj", WNConv1d(cfg.posterior_channels, 2 * cfg.latent_dim, 1));
}

GaussianParams PosteriorEncoderImpl::forward(const torch::Tensor &mel) {
  if (!torch::isfinite(mel).all().item<bool>()) throw std::invalid_argument("posterior encoder: non-finite input");
  torch::Tensor x = (mel - kMelOffset) / kMelScale;
  for (std::size_t i = 0; i < layers->size(); ++i) {
    torch::Tensor y = Leaky(layers[i]->as<WNConv1dImpl>()->forward(x));
    x = i == 0 ? y : x + y;
  }
  auto parts = proj(x).chunk(2, 1);
  GaussianParams p{parts[0], parts[1]};
  if (force_log_std) p.log_std = torch::full_like(p.log_std, *force_log_std);
  return p;
}

RelativeAttentionImpl::RelativeAttentionImpl(int channels, int heads_, int window_)
    : heads(heads_), window(window_) {
  q = register_module("q", torch::nn::Conv1d(channels, channels, 1));
  k = register_module("k", torch::nn::Conv1d(channels, channels, 1));
  v = register_module("v", torch::nn::Conv1d(channels, channels, 1));
  o = register_module("o", torch::nn::Conv1d(channels, channels, 1));
  const int head_dim = channels / heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(head_dim));
  rel_k = register_parameter("rel_k", torch::randn({2 * window + 1, head_dim}) * scale);
  rel_v = register_parameter("rel_v", torch::randn({2 * window + 1, head_dim}) * scale);
}

torch::Tensor RelativeAttentionImpl::forward(const torch::Tensor &x) {
  const long B = x.size(0), C = x.size(1), T = x.size(2), dh = C / heads;
  auto split = [&](const torch::Tensor &t) { return t.view({B, heads, dh, T}).transpose(2, 3); };
  torch::Tensor qh = split(q(x)) / std::sqrt(static_cast<double>(dh));
  torch::Tensor kh = split(k(x)), vh = split(v(x));

  // idx[i][j] = clip(j - i, -w, w) + w
  torch::Tensor pos = torch::arange(T, torch::kInt64);
  torch::Tensor idx = (pos.view({1, T}) - pos.view({T, 1})).clamp(-window, window) + window;
  idx = idx.view({1, 1, T, T}).expand({B, heads, T, T});

  torch::Tensor scores = torch::matmul(qh, kh.transpose(2, 3));
  scores = scores + torch::matmul(qh, rel_k.t()).gather(3, idx);
  torch::Tensor p = torch::softmax(scores, -1);
  torch::Tensor out = torch::matmul(p, vh);
  torch::Tensor binned = torch::zeros({B, heads, T, 2 * window + 1}, p.options()).scatter_add(3, idx, p);
  out = out + torch::matmul(binned, rel_v);
  return o(out.transpose(2, 3).reshape({B, C, T}));
}

PriorEncoderImpl::PriorEncoderImpl(const ModelConfig &cfg) : hidden(cfg.prior_hidden) {
  phoneme_embedding = register_module(
      "phoneme_embedding", torch::nn::Embedding(static_cast<int64_t>(PhonemeInventory().size()), hidden));
  pitch_embedding = register_module("pitch_embedding", torch::nn::Embedding(128, hidden));
  attention = register_module("attention", torch::nn::ModuleList());
  ffn_in = register_module("ffn_in", torch::nn::ModuleList());
  ffn_out = register_module("ffn_out", torch::nn::ModuleList());
  norm1 = register_module("norm1", torch::nn::ModuleList());
  norm2 = register_module("norm2", torch::nn::ModuleList());
  const int pad = (cfg.ffn_kernel - 1) / 2;
  for (int b = 0; b < cfg.prior_blocks; ++b) {
    attention->push_back(RelativeAttention(hidden, cfg.prior_heads, cfg.attention_window));
    ffn_in->push_back(
        torch::nn::Conv1d(torch::nn::Conv1dOptions(hidden, cfg.ffn_channels, cfg.ffn_kernel).padding(pad)));
    ffn_out->push_back(
        torch::nn::Conv1d(torch::nn::Conv1dOptions(cfg.ffn_channels, hidden, cfg.ffn_kernel).padding(pad)));
    norm1->push_back(torch::nn::LayerNorm(torch::nn::LayerNormOptions({hidden})));
    norm2->push_back(torch::nn::LayerNorm(torch::nn::LayerNormOptions({hidden})));
  }
  proj = register_module("proj", torch::nn::Conv1d(hidden, 2 * cfg.latent_dim, 1));
}

GaussianParams PriorEncoderImpl::forward(const torch::Tensor &phonemes, const torch::Tensor &pitches) {
  if (phonemes.size(1) == 0) throw std::invalid_argument("prior encoder: score has zero frames");
  auto channel_norm = [](const std::shared_ptr<torch::nn::Module> &m, const torch::Tensor &x) {
    return m->as<torch::nn::LayerNormImpl>()->forward(x.transpose(1, 2)).transpose(1, 2);
  };
  torch::Tensor x = (phoneme_embedding(phonemes) + pitch_embedding(pitches)).transpose(1, 2);
  for (std::size_t b = 0; b < attention->size(); ++b) {
    x = channel_norm(norm1[b], x + attention[b]->as<RelativeAttentionImpl>()->forward(x));
    torch::Tensor y = torch::relu(ffn_in[b]->as<torch::nn::Conv1dImpl>()->forward(x));
    y = ffn_out[b]->as<torch::nn::Conv1dImpl>()->forward(y);
    x = channel_norm(norm2[b], x + y);
  }
  auto parts = proj(x).chunk(2, 1);
  return {parts[0], parts[1]};
}

ResBlockImpl::ResBlockImpl(int channels, int kernel, const std::vector<int> &dilations) {
  convs = register_module("convs", torch::nn::ModuleList());
  for (int d : dilations) convs->push_back(WNConv1d(channels, channels, kernel, 1, d));
}

torch::Tensor ResBlockImpl::forward(torch::Tensor x) {
  for (const auto &c : *convs) x = x + c->as<WNConv1dImpl>()->forward(Leaky(x));
  return x;
}

DecoderImpl::DecoderImpl(const ModelConfig &cfg) {
  conv_pre = register_module("conv_pre", WNConv1d(cfg.latent_dim, cfg.decoder_channels, 7));
  ups = register_module("ups", torch::nn::ModuleList());
  blocks = register_module("blocks", torch::nn::ModuleList());
  int ch = cfg.decoder_channels;
  for (int r : cfg.upsample_rates) {
    ups->push_back(WNConvTranspose1d(ch, ch / 2, 2 * r, r, r / 2));
    ch /= 2;
    blocks->push_back(ResBlock(ch, cfg.resblock_kernel, cfg.resblock_dilations));
  }
  conv_post = register_module("conv_post", WNConv1d(ch, 1, 7));
}

torch::Tensor DecoderImpl::forward(const torch::Tensor &latent) {
  torch::Tensor x = conv_pre(latent);
  for (std::size_t i = 0; i < ups->size(); ++i) {
    x = ups[i]->as<WNConvTranspose1dImpl>()->forward(Leaky(x));
    x = blocks[i]->as<ResBlockImpl>()->forward(x);
  }
  return torch::tanh(conv_post(Leaky(x))).squeeze(1);
}

}  // namespace usvs
