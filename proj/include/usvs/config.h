// include/usvs/config.h

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

#ifndef USVS_CONFIG_H_
#define USVS_CONFIG_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

namespace usvs {

struct ModelConfig {
  int sample_rate = 16000;
  int n_fft = 1024;
  int hop_length = 256;
  int win_length = 1024;
  int n_mels = 80;
  int latent_dim = 64;

  int posterior_channels = 96;
  int posterior_layers = 4;
  int posterior_kernel = 5;

  int prior_hidden = 96;
  int prior_blocks = 2;
  int prior_heads = 2;
  int attention_window = 4;
  int ffn_channels = 192;
  int ffn_kernel = 3;

  int decoder_channels = 96;
  std::vector<int> upsample_rates = {8, 8, 4};
  int resblock_kernel = 3;
  std::vector<int> resblock_dilations = {1, 3};

  std::vector<int> mrsd_fft_sizes = {256, 512, 1024};
  std::vector<int> mpd_periods = {2, 3, 5};
  std::vector<int> msd_scales = {1, 2, 4};
  int disc_channels = 16;

  int FrameCount(long num_samples) const { return static_cast<int>(num_samples / hop_length); }
  double FrameRate() const { return static_cast<double>(sample_rate) / hop_length; }
  void Validate() const;
  bool operator==(const ModelConfig &) const = default;
};

struct LossWeights {
  double kl = 1.0;
  double recon = 45.0;
  double adv = 1.0;
  double feature_match = 0.0;
  double uncertainty = 10.0;
};

enum class AugmentMode { kMask, kNoise, kMaskNoise };
std::string AugmentModeName(AugmentMode m);
AugmentMode ParseAugmentMode(const std::string &s);

struct AugmentConfig {
  bool enabled = true;
  AugmentMode mode = AugmentMode::kNoise;
  double ratio = 0.1;
  double mask_value = 0.0;
  double noise_scale = 0.1;
  bool shared_interval = false;
  bool relative_to_std = false;
  void Validate() const;
};

struct OptimizerConfig {
  double lr = 2.0e-4;
  double beta1 = 0.8;
  double beta2 = 0.99;
  double eps = 1e-9;
  double weight_decay = 0.0;
  double lr_decay = 0.998;
};

struct ScheduleConfig {
  int uncertainty_start = 20;
  int augment_start = 80;
  bool scale_schedule = false;
  int reference_epochs = 200;
};

struct UncertaintyConfig {
  int grid_length = 100;
  int channels = 64;
  int kernel = 3;
  bool backprop_through_target = false;
};

enum class AdversarialForm { kLeastSquares, kLiteral };
enum class RealBranch { kPosteriorSample, kGroundTruth };

struct TrainConfig {
  int epochs = 30;
  int batch_size = 4;
  double segment_seconds = 1.0;
  AdversarialForm adversarial_form = AdversarialForm::kLeastSquares;
  RealBranch real_branch = RealBranch::kPosteriorSample;
  std::uint64_t seed = 1234;
  int keep_checkpoints = 0;  // 0 keeps every epoch
  int num_threads = 1;
};

struct Config {
  ModelConfig model;
  LossWeights loss_weights;
  AugmentConfig augment;
  OptimizerConfig optimizer;
  ScheduleConfig schedule;
  UncertaintyConfig uncertainty;
  TrainConfig train;

  void Validate() const;
};

nlohmann::json ToJson(const Config &c);
nlohmann::json ToJson(const ModelConfig &m);
/// Missing keys keep their defaults; unknown keys and wrong types throw
/// std::invalid_argument naming the offending key.
Config ConfigFromJson(const nlohmann::json &j);
ModelConfig ModelConfigFromJson(const nlohmann::json &j);
Config LoadConfig(const std::filesystem::path &path);

/// Applies "section.key=value" where value is parsed as JSON (bare words are
/// taken as strings).
void ApplyOverride(nlohmann::json *config, const std::string &assignment);

}  // namespace usvs

#endif  // USVS_CONFIG_H_
