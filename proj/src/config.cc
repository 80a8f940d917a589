// src/config.cc

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

#include "usvs/config.h"

#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>

namespace usvs {

using nlohmann::json;

namespace {

// Strict object reader: every key must be claimed by a field.
class Reader {
 public:
  Reader(const json &j, std::string section) : j_(j), section_(std::move(section)) {
    if (!j.is_object()) throw std::invalid_argument("config: '" + section_ + "' must be an object");
  }

  template <typename T>
  Reader &Field(const std::string &key, T *out) {
    fields_[key] = [this, key, out](const json &v) {
      try {
        if constexpr (std::is_same_v<T, bool>) {
          if (!v.is_boolean()) throw std::invalid_argument("expected boolean");
        } else if constexpr (std::is_integral_v<T>) {
          if (!v.is_number_integer()) throw std::invalid_argument("expected integer");
        } else if constexpr (std::is_floating_point_v<T>) {
          if (!v.is_number()) throw std::invalid_argument("expected number");
        }
        *out = v.get<T>();
      } catch (const std::exception &e) {
        throw std::invalid_argument("config: bad value for '" + Path(key) + "': " + e.what());
      }
    };
    return *this;
  }

  Reader &Custom(const std::string &key, std::function<void(const json &)> fn) {
    fields_[key] = [this, key, fn](const json &v) {
      try {
        fn(v);
      } catch (const std::exception &e) {
        throw std::invalid_argument("config: bad value for '" + Path(key) + "': " + e.what());
      }
    };
    return *this;
  }

  void Run() const {
    for (const auto &[key, value] : j_.items()) {
      auto it = fields_.find(key);
      if (it == fields_.end()) throw std::invalid_argument("config: unknown key '" + Path(key) + "'");
      it->second(value);
    }
  }

 private:
  std::string Path(const std::string &key) const { return section_.empty() ? key : section_ + "." + key; }
  const json &j_;
  std::string section_;
  std::map<std::string, std::function<void(const json &)>> fields_;
};

void ReadModel(const json &j, ModelConfig *m) {
  Reader(j, "model")
      .Field("sample_rate", &m->sample_rate)
      .Field("n_fft", &m->n_fft)
      .Field("hop_length", &m->hop_length)
      .Field("win_length", &m->win_length)
      .Field("n_mels", &m->n_mels)
      .Field("latent_dim", &m->latent_dim)
      .Field("posterior_channels", &m->posterior_channels)
      .Field("posterior_layers", &m->posterior_layers)
      .Field("posterior_kernel", &m->posterior_kernel)
      .Field("prior_hidden", &m->prior_hidden)
      .Field("prior_blocks", &m->prior_blocks)
      .Field("prior_heads", &m->prior_heads)
      .Field("attention_window", &m->attention_window)
      .Field("ffn_channels", &m->ffn_channels)
      .Field("ffn_kernel", &m->ffn_kernel)
      .Field("decoder_channels", &m->decoder_channels)
      .Field("upsample_rates", &m->upsample_rates)
      .Field("resblock_kernel", &m->resblock_kernel)
      .Field("resblock_dilations", &m->resblock_dilations)
      .Field("mrsd_fft_sizes", &m->mrsd_fft_sizes)
      .Field("mpd_periods", &m->mpd_periods)
      .Field("msd_scales", &m->msd_scales)
      .Field("disc_channels", &m->disc_channels)
      .Run();
}

}  // namespace

std::string AugmentModeName(AugmentMode m) {
  switch (m) {
    case AugmentMode::kMask: return "mask";
    case AugmentMode::kNoise: return "noise";
    case AugmentMode::kMaskNoise: return "mask+noise";
  }
  return "?";
}

AugmentMode ParseAugmentMode(const std::string &s) {
  if (s == "mask") return AugmentMode::kMask;
  if (s == "noise") return AugmentMode::kNoise;
  if (s == "mask+noise") return AugmentMode::kMaskNoise;
  throw std::invalid_argument("unknown augment mode '" + s + "' (expected mask, noise or mask+noise)");
}

void ModelConfig::Validate() const {
  auto require = [](bool ok, const std::string &what) {
    if (!ok) throw std::invalid_argument("model config: " + what);
  };
  require(sample_rate >= 8000, "sample_rate must be >= 8000");
  require(hop_length > 0 && win_length > 0 && win_length <= n_fft, "need 0 < win_length <= n_fft");
  require(n_mels > 0 && latent_dim > 0, "n_mels and latent_dim must be positive");
  require(posterior_layers >= 1 && posterior_kernel % 2 == 1, "posterior kernel must be odd");
  require(prior_blocks >= 1 && prior_heads >= 1 && prior_hidden % prior_heads == 0,
          "prior_hidden must divide into prior_heads");
  require(attention_window >= 0 && ffn_kernel % 2 == 1, "ffn_kernel must be odd");
  require(resblock_kernel % 2 == 1, "resblock_kernel must be odd");
  long product = 1;
  for (int r : upsample_rates) {
    require(r >= 2 && r % 2 == 0, "upsample rates must be even and >= 2");
    product *= r;
  }
  require(product == hop_length, "upsample rates must multiply to hop_length");
  long ch = decoder_channels;
  for (std::size_t i = 0; i < upsample_rates.size(); ++i) ch /= 2;
  require(ch >= 1, "decoder_channels too small for the upsampling stack");
  require(!mrsd_fft_sizes.empty() && !mpd_periods.empty() && !msd_scales.empty(),
          "each discriminator family needs at least one component");
  require(disc_channels >= 8 && disc_channels % 8 == 0, "disc_channels must be a positive multiple of 8");
}

void AugmentConfig::Validate() const {
  if (!(ratio > 0.0 && ratio < 1.0)) throw std::invalid_argument("augment.ratio must be in (0,1)");
  if (!(mask_value >= 0.0 && mask_value < 1.0))
    throw std::invalid_argument("augment.mask_value must be in [0,1)");
  if (!(noise_scale >= 0.0)) throw std::invalid_argument("augment.noise_scale must be >= 0");
}

void Config::Validate() const {
  model.Validate();
  augment.Validate();
  for (double w : {loss_weights.kl, loss_weights.recon, loss_weights.adv, loss_weights.feature_match,
                   loss_weights.uncertainty})
    if (!(w >= 0.0)) throw std::invalid_argument("loss weights must be >= 0");
  if (train.epochs < 1) throw std::invalid_argument("train.epochs must be >= 1");
  if (train.batch_size < 1) throw std::invalid_argument("train.batch_size must be >= 1");
  if (!(train.segment_seconds > 0.0)) throw std::invalid_argument("train.segment_seconds must be > 0");
  if (uncertainty.grid_length < 1) throw std::invalid_argument("uncertainty.grid_length must be >= 1");
  if (!(optimizer.lr >= 0.0) || !(optimizer.eps > 0.0))
    throw std::invalid_argument("optimizer.lr must be >= 0 and eps > 0");
  if (schedule.reference_epochs < 1) throw std::invalid_argument("schedule.reference_epochs must be >= 1");
}

json ToJson(const ModelConfig &m) {
  return {{"sample_rate", m.sample_rate},
          {"n_fft", m.n_fft},
          {"hop_length", m.hop_length},
          {"win_length", m.win_length},
          {"n_mels", m.n_mels},
          {"latent_dim", m.latent_dim},
          {"posterior_channels", m.posterior_channels},
          {"posterior_layers", m.posterior_layers},
          {"posterior_kernel", m.posterior_kernel},
          {"prior_hidden", m.prior_hidden},
          {"prior_blocks", m.prior_blocks},
          {"prior_heads", m.prior_heads},
          {"attention_window", m.attention_window},
          {"ffn_channels", m.ffn_channels},
          {"ffn_kernel", m.ffn_kernel},
          {"decoder_channels", m.decoder_channels},
          {"upsample_rates", m.upsample_rates},
          {"resblock_kernel", m.resblock_kernel},
          {"resblock_dilations", m.resblock_dilations},
          {"mrsd_fft_sizes", m.mrsd_fft_sizes},
          {"mpd_periods", m.mpd_periods},
          {"msd_scales", m.msd_scales},
          {"disc_channels", m.disc_channels}};
}

json ToJson(const Config &c) {
  json j;
  j["model"] = ToJson(c.model);
  j["loss_weights"] = {{"kl", c.loss_weights.kl},
                       {"recon", c.loss_weights.recon},
                       {"adv", c.loss_weights.adv},
                       {"feature_match", c.loss_weights.feature_match},
                       {"uncertainty", c.loss_weights.uncertainty}};
  j["augment"] = {{"enabled", c.augment.enabled},
                  {"mode", AugmentModeName(c.augment.mode)},
                  {"ratio", c.augment.ratio},
                  {"mask_value", c.augment.mask_value},
                  {"noise_scale", c.augment.noise_scale},
                  {"shared_interval", c.augment.shared_interval},
                  {"relative_to_std", c.augment.relative_to_std}};
  j["optimizer"] = {{"lr", c.optimizer.lr},
                    {"beta1", c.optimizer.beta1},
                    {"beta2", c.optimizer.beta2},
                    {"eps", c.optimizer.eps},
                    {"weight_decay", c.optimizer.weight_decay},
                    {"lr_decay", c.optimizer.lr_decay}};
  j["schedule"] = {{"uncertainty_start", c.schedule.uncertainty_start},
                   {"augment_start", c.schedule.augment_start},
                   {"scale_schedule", c.schedule.scale_schedule},
                   {"reference_epochs", c.schedule.reference_epochs}};
  j["uncertainty"] = {{"grid_length", c.uncertainty.grid_length},
                      {"channels", c.uncertainty.channels},
                      {"kernel", c.uncertainty.kernel},
                      {"backprop_through_target", c.uncertainty.backprop_through_target}};
  j["train"] = {
      {"epochs", c.train.epochs},
      {"batch_size", c.train.batch_size},
      {"segment_seconds", c.train.segment_seconds},
      {"adversarial_form",
       c.train.adversarial_form == AdversarialForm::kLeastSquares ? "least_squares" : "literal"},
      {"real_branch",
       c.train.real_branch == RealBranch::kPosteriorSample ? "posterior_sample" : "ground_truth"},
      {"seed", c.train.seed},
      {"keep_checkpoints", c.train.keep_checkpoints},
      {"num_threads", c.train.num_threads}};
  return j;
}

ModelConfig ModelConfigFromJson(const json &j) {
  ModelConfig m;
  ReadModel(j, &m);
  m.Validate();
  return m;
}

Config ConfigFromJson(const json &j) {
  Config c;
  Reader(j, "")
      .Custom("model", [&](const json &v) { ReadModel(v, &c.model); })
      .Custom("loss_weights",
              [&](const json &v) {
                Reader(v, "loss_weights")
                    .Field("kl", &c.loss_weights.kl)
                    .Field("recon", &c.loss_weights.recon)
                    .Field("adv", &c.loss_weights.adv)
                    .Field("feature_match", &c.loss_weights.feature_match)
                    .Field("uncertainty", &c.loss_weights.uncertainty)
                    .Run();
              })
      .Custom("augment",
              [&](const json &v) {
                Reader(v, "augment")
                    .Field("enabled", &c.augment.enabled)
                    .Custom("mode", [&](const json &m) { c.augment.mode = ParseAugmentMode(m.get<std::string>()); })
                    .Field("ratio", &c.augment.ratio)
                    .Field("mask_value", &c.augment.mask_value)
                    .Field("noise_scale", &c.augment.noise_scale)
                    .Field("shared_interval", &c.augment.shared_interval)
                    .Field("relative_to_std", &c.augment.relative_to_std)
                    .Run();
              })
      .Custom("optimizer",
              [&](const json &v) {
                Reader(v, "optimizer")
                    .Field("lr", &c.optimizer.lr)
                    .Field("beta1", &c.optimizer.beta1)
                    .Field("beta2", &c.optimizer.beta2)
                    .Field("eps", &c.optimizer.eps)
                    .Field("weight_decay", &c.optimizer.weight_decay)
                    .Field("lr_decay", &c.optimizer.lr_decay)
                    .Run();
              })
      .Custom("schedule",
              [&](const json &v) {
                Reader(v, "schedule")
                    .Field("uncertainty_start", &c.schedule.uncertainty_start)
                    .Field("augment_start", &c.schedule.augment_start)
                    .Field("scale_schedule", &c.schedule.scale_schedule)
                    .Field("reference_epochs", &c.schedule.reference_epochs)
                    .Run();
              })
      .Custom("uncertainty",
              [&](const json &v) {
                Reader(v, "uncertainty")
                    .Field("grid_length", &c.uncertainty.grid_length)
                    .Field("channels", &c.uncertainty.channels)
                    .Field("kernel", &c.uncertainty.kernel)
                    .Field("backprop_through_target", &c.uncertainty.backprop_through_target)
                    .Run();
              })
      .Custom("train", [&](const json &v) {
        Reader(v, "train")
            .Field("epochs", &c.train.epochs)
            .Field("batch_size", &c.train.batch_size)
            .Field("segment_seconds", &c.train.segment_seconds)
            .Custom("adversarial_form",
                    [&](const json &f) {
                      const auto s = f.get<std::string>();
                      if (s == "least_squares")
                        c.train.adversarial_form = AdversarialForm::kLeastSquares;
                      else if (s == "literal")
                        c.train.adversarial_form = AdversarialForm::kLiteral;
                      else
                        throw std::invalid_argument("expected least_squares or literal");
                    })
            .Custom("real_branch",
                    [&](const json &f) {
                      const auto s = f.get<std::string>();
                      if (s == "posterior_sample")
                        c.train.real_branch = RealBranch::kPosteriorSample;
                      else if (s == "ground_truth")
                        c.train.real_branch = RealBranch::kGroundTruth;
                      else
                        throw std::invalid_argument("expected posterior_sample or ground_truth");
                    })
            .Field("seed", &c.train.seed)
            .Field("keep_checkpoints", &c.train.keep_checkpoints)
            .Field("num_threads", &c.train.num_threads)
            .Run();
      })
      .Run();
  c.Validate();
  return c;
}

Config LoadConfig(const std::filesystem::path &path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open config " + path.string());
  json j;
  try {
    j = json::parse(is);
  } catch (const json::parse_error &e) {
    throw std::invalid_argument("config " + path.string() + ": " + e.what());
  }
  return ConfigFromJson(j);
}

void ApplyOverride(json *config, const std::string &assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0)
    throw std::invalid_argument("override must look like section.key=value: " + assignment);
  const std::string path = assignment.substr(0, eq), text = assignment.substr(eq + 1);
  json value;
  try {
    value = json::parse(text);
  } catch (const json::parse_error &) {
    value = text;
  }
  json *node = config;
  std::stringstream ss(path);
  std::string part;
  std::vector<std::string> parts;
  while (std::getline(ss, part, '.')) parts.push_back(part);
  for (std::size_t i = 0; i + 1 < parts.size(); ++i) node = &(*node)[parts[i]];
  (*node)[parts.back()] = value;
}

}  // namespace usvs
