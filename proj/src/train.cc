// src/train.cc

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

#include "usvs/train.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <stdexcept>

#include <ATen/CPUGeneratorImpl.h>

#include "usvs/losses.h"

namespace usvs {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::vector<std::pair<std::string, std::string>> kAliases = {
    {"b", "B"}, {"bd", "B+D"}, {"bu", "B&U"}, {"bud", "B&U&(U+D)"}};

json FlagsJson(const StageFlags &f) { return {{"augment_on", f.augment_on}, {"uncertainty_on", f.uncertainty_on}}; }

StageFlags FlagsFromJson(const json &j) { return {j.at("augment_on").get<bool>(), j.at("uncertainty_on").get<bool>()}; }

void CheckFinite(const torch::Tensor &t, const std::string &term, long step) {
  if (!std::isfinite(t.item<double>()))
    throw std::runtime_error("non-finite " + term + " loss at step " + std::to_string(step));
}

std::vector<torch::Tensor> Parameters(torch::nn::Module &m) { return m.parameters(); }

std::string ParamStateKey(const std::string &group, const std::string &name, const char *field) {
  return "opt_" + group + "/" + name + "/" + field;
}

void SaveOptimizer(const torch::optim::AdamW &opt, const torch::nn::Module &module, const std::string &group,
                   CheckpointData *data) {
  for (const auto &item : module.named_parameters()) {
    auto it = opt.state().find(item.value().unsafeGetTensorImpl());
    if (it == opt.state().end()) continue;
    const auto &st = static_cast<const torch::optim::AdamWParamState &>(*it->second);
    data->Add(ParamStateKey(group, item.key(), "exp_avg"), st.exp_avg());
    data->Add(ParamStateKey(group, item.key(), "exp_avg_sq"), st.exp_avg_sq());
    data->Add(ParamStateKey(group, item.key(), "step"), torch::tensor({st.step()}, torch::kInt64));
  }
}

void LoadOptimizer(torch::optim::AdamW &opt, torch::nn::Module &module, const std::string &group,
                   const CheckpointData &data) {
  opt.state().clear();
  for (const auto &item : module.named_parameters()) {
    const std::string key = ParamStateKey(group, item.key(), "step");
    if (!data.Has(key)) continue;
    auto st = std::make_unique<torch::optim::AdamWParamState>();
    st->step(data.Get(key).item<int64_t>());
    st->exp_avg(data.Get(ParamStateKey(group, item.key(), "exp_avg")).clone());
    st->exp_avg_sq(data.Get(ParamStateKey(group, item.key(), "exp_avg_sq")).clone());
    opt.state()[item.value().unsafeGetTensorImpl()] = std::move(st);
  }
}

void LoadModule(torch::nn::Module &module, const std::string &prefix, const CheckpointData &data) {
  torch::NoGradGuard no_grad;
  for (auto &item : module.named_parameters()) {
    const torch::Tensor &src = data.Get(prefix + item.key());
    if (src.sizes() != item.value().sizes())
      throw std::runtime_error("checkpoint: shape mismatch for " + prefix + item.key() +
                               " (model config differs from the checkpoint)");
    item.value().copy_(src);
  }
}

std::unique_ptr<torch::optim::AdamW> MakeOptimizer(const std::vector<torch::Tensor> &params,
                                                   const OptimizerConfig &o) {
  return std::make_unique<torch::optim::AdamW>(
      params, torch::optim::AdamWOptions(o.lr).betas({o.beta1, o.beta2}).eps(o.eps).weight_decay(o.weight_decay));
}

json StrategyJson(const TrainingStrategy &s) {
  json sched = json::array();
  for (const auto &[start, flags] : s.schedule) sched.push_back({{"start", start}, {"flags", FlagsJson(flags)}});
  return {{"name", s.name}, {"schedule", sched}};
}

TrainingStrategy StrategyFromJson(const json &j) {
  TrainingStrategy s;
  s.name = j.at("name").get<std::string>();
  for (const auto &e : j.at("schedule")) s.schedule.emplace_back(e.at("start").get<int>(), FlagsFromJson(e.at("flags")));
  return s;
}

}  // namespace

StageFlags TrainingStrategy::FlagsAt(int epoch) const {
  StageFlags flags;
  for (const auto &[start, f] : schedule)
    if (epoch >= start) flags = f;
  return flags;
}

const std::vector<std::string> &StrategyNames() {
  static const std::vector<std::string> names = {"B", "B+D", "B&U", "B&U&(U+D)"};
  return names;
}

std::string CanonicalStrategyName(const std::string &name) {
  for (const auto &n : StrategyNames())
    if (n == name) return n;
  for (const auto &[alias, n] : kAliases)
    if (alias == name) return n;
  throw std::invalid_argument("unknown strategy '" + name +
                              "'; valid strategies: B, B+D, B&U, B&U&(U+D) (aliases b, bd, bu, bud)");
}

TrainingStrategy MakeStrategy(const std::string &name, const ScheduleConfig &schedule, int total_epochs) {
  TrainingStrategy s;
  s.name = CanonicalStrategyName(name);
  auto threshold = [&](int literal) {
    if (!schedule.scale_schedule) return literal;
    return static_cast<int>(std::lround(static_cast<double>(literal) * total_epochs / schedule.reference_epochs));
  };
  const int u = threshold(schedule.uncertainty_start), a = threshold(schedule.augment_start);
  if (s.name == "B") {
    s.schedule = {{0, {false, false}}};
  } else if (s.name == "B+D") {
    s.schedule = {{0, {true, false}}};
  } else if (s.name == "B&U") {
    s.schedule = {{0, {false, false}}, {u, {false, true}}};
  } else {
    s.schedule = {{0, {false, false}}, {u, {false, true}}, {std::max(a, u), {true, true}}};
  }
  return s;
}

double LearningRate(const OptimizerConfig &opt, int epoch) { return opt.lr * std::pow(opt.lr_decay, epoch); }

TrainingExample MakeExample(const std::string &id, const std::vector<double> &waveform, const MusicScore &score,
                            const ModelConfig &cfg) {
  const FrameScore fs = RegulateLength(score, cfg.FrameRate());
  const long frames = std::min<long>(static_cast<long>(fs.size()), cfg.FrameCount(static_cast<long>(waveform.size())));
  if (frames < 1) throw std::invalid_argument("utterance '" + id + "' is shorter than one frame");
  TrainingExample ex;
  ex.id = id;
  ex.wave = torch::tensor(std::vector<double>(waveform.begin(), waveform.begin() + frames * cfg.hop_length),
                          torch::kFloat64)
                .to(torch::kFloat32);
  ex.phonemes = torch::tensor(std::vector<int64_t>(fs.phonemes.begin(), fs.phonemes.begin() + frames), torch::kInt64);
  ex.pitches = torch::tensor(std::vector<int64_t>(fs.pitches.begin(), fs.pitches.begin() + frames), torch::kInt64);
  return ex;
}

std::vector<TrainingExample> LoadExamples(const CorpusManifest &manifest, std::string_view split,
                                          const ModelConfig &cfg) {
  std::vector<TrainingExample> out;
  for (const auto &id : SplitManifest(manifest, split)) {
    const Utterance u = LoadUtterance(manifest, manifest.Find(id));
    if (u.sample_rate != cfg.sample_rate)
      throw std::invalid_argument("utterance '" + id + "' has sample rate " + std::to_string(u.sample_rate) +
                                  ", model expects " + std::to_string(cfg.sample_rate));
    out.push_back(MakeExample(id, u.waveform, u.score, cfg));
  }
  if (out.empty()) throw std::invalid_argument("split '" + std::string(split) + "' is empty");
  return out;
}

Batch MakeBatch(const std::vector<const TrainingExample *> &examples, long segment_frames, at::Generator &gen) {
  if (examples.empty()) throw std::invalid_argument("empty batch");
  long seg = segment_frames;
  for (const auto *e : examples) seg = std::min(seg, e->frames());
  const long hop = examples[0]->wave.size(0) / examples[0]->frames();
  Batch b;
  std::vector<torch::Tensor> waves, ph, pitch;
  for (const auto *e : examples) {
    const long start = torch::randint(0, e->frames() - seg + 1, {1}, gen, torch::kInt64).item<long>();
    b.ids.push_back(e->id);
    waves.push_back(e->wave.narrow(0, start * hop, seg * hop));
    ph.push_back(e->phonemes.narrow(0, start, seg));
    pitch.push_back(e->pitches.narrow(0, start, seg));
  }
  b.wave = torch::stack(waves);
  b.phonemes = torch::stack(ph);
  b.pitches = torch::stack(pitch);
  return b;
}

json LossReport::ToJson() const {
  return {{"discriminator", discriminator}, {"adversarial", adversarial},     {"kl", kl},
          {"recon", recon},                 {"feature_match", feature_match}, {"uncertainty", uncertainty},
          {"generator_total", generator_total}};
}

LossReport LossReport::FromJson(const json &j) {
  LossReport r;
  r.discriminator = j.at("discriminator");
  r.adversarial = j.at("adversarial");
  r.kl = j.at("kl");
  r.recon = j.at("recon");
  r.feature_match = j.at("feature_match");
  r.uncertainty = j.at("uncertainty");
  r.generator_total = j.at("generator_total");
  return r;
}

json EpochLog::ToJson() const {
  return {{"epoch", epoch}, {"flags", FlagsJson(flags)}, {"losses", losses.ToJson()}, {"lr", lr}, {"steps", steps}};
}

EpochLog EpochLog::FromJson(const json &j) {
  EpochLog e;
  e.epoch = j.at("epoch");
  e.flags = FlagsFromJson(j.at("flags"));
  e.losses = LossReport::FromJson(j.at("losses"));
  e.lr = j.at("lr");
  e.steps = j.at("steps");
  return e;
}

Trainer::Trainer(const Config &cfg, TrainingStrategy strategy)
    : cfg_(cfg), strategy_(std::move(strategy)), rng_(at::make_generator<at::CPUGeneratorImpl>(cfg.train.seed)) {
  cfg_.Validate();
  at::set_num_threads(cfg_.train.num_threads);
  torch::manual_seed(cfg_.train.seed);
  generator_ = Synthesizer(cfg_.model, cfg_.uncertainty);
  discriminators_ = DiscriminatorBundle(cfg_.model);
  opt_g_ = MakeOptimizer(Parameters(*generator_), cfg_.optimizer);
  opt_d_ = MakeOptimizer(Parameters(*discriminators_), cfg_.optimizer);
}

void Trainer::SetLearningRate(double lr) {
  for (auto *opt : {opt_g_.get(), opt_d_.get()})
    for (auto &group : opt->param_groups()) static_cast<torch::optim::AdamWOptions &>(group.options()).lr(lr);
}

LossReport Trainer::TrainStep(const Batch &batch, const StageFlags &flags) {
  generator_->train();
  discriminators_->train();
  const LossWeights &w = cfg_.loss_weights;
  const AugmentConfig *augment = flags.augment_on ? &cfg_.augment : nullptr;
  const bool shared = cfg_.augment.shared_interval;
  const long frames = batch.phonemes.size(1);

  // Generator forward.
  auto [lx_full, q_full] = generator_->EncodePosterior(batch.wave, rng_);
  torch::Tensor lx = lx_full.narrow(2, 0, frames);
  GaussianParams q{q_full.mean.narrow(2, 0, frames), q_full.log_std.narrow(2, 0, frames)};
  torch::Tensor z = torch::randn({batch.wave.size(0), cfg_.model.latent_dim, frames}, rng_, torch::kFloat32);
  auto [lz, p] = generator_->EncodePrior(batch.phonemes, batch.pitches, z);
  torch::Tensor x_hat = generator_->Decode(lx);
  torch::Tensor z_hat = generator_->Decode(lz);
  torch::Tensor real =
      cfg_.train.real_branch == RealBranch::kPosteriorSample ? x_hat.detach() : batch.wave;

  LossReport report;

  // Discriminator update.
  std::vector<AugmentPlan> plans;
  auto d_real = discriminators_->Discriminate(real, augment, &rng_, shared ? &plans : nullptr);
  auto d_fake = discriminators_->Discriminate(z_hat.detach(), augment, &rng_, shared ? &plans : nullptr);
  if (feature_hook) feature_hook(TrainPhase::kDiscriminator, &d_real, d_fake);
  torch::Tensor loss_d = AdversarialLosses(Scores(d_real), Scores(d_fake), cfg_.train.adversarial_form).first;
  CheckFinite(loss_d, "discriminator adversarial", step_);
  opt_d_->zero_grad();
  loss_d.backward();
  opt_d_->step();
  report.discriminator = loss_d.item<double>();

  // Generator update.
  std::vector<AugmentPlan> plans_g;
  auto g_fake = discriminators_->Discriminate(z_hat, augment, &rng_, shared ? &plans_g : nullptr);
  if (feature_hook) feature_hook(TrainPhase::kGenerator, nullptr, g_fake);
  torch::Tensor loss_adv = AdversarialLosses(Scores(g_fake), Scores(g_fake), cfg_.train.adversarial_form).second;
  torch::Tensor loss_kl = KlLoss(q, p);
  torch::Tensor loss_recon = ReconstructionLoss(generator_->mel, batch.wave, x_hat);
  torch::Tensor total = w.kl * loss_kl + w.recon * loss_recon + w.adv * loss_adv;
  CheckFinite(loss_adv, "generator adversarial", step_);
  CheckFinite(loss_kl, "kl", step_);
  CheckFinite(loss_recon, "reconstruction", step_);
  if (w.feature_match > 0.0) {
    auto g_real = discriminators_->Discriminate(real, augment, &rng_, shared ? &plans_g : nullptr);
    torch::Tensor loss_fm = FeatureMatchingLoss(g_real, g_fake);
    CheckFinite(loss_fm, "feature matching", step_);
    total = total + w.feature_match * loss_fm;
    report.feature_match = loss_fm.item<double>();
  }
  if (flags.uncertainty_on) {
    torch::Tensor u = generator_->predictor(lz);
    torch::Tensor d = TargetDistance(batch.wave, z_hat, cfg_.uncertainty.grid_length);
    if (!cfg_.uncertainty.backprop_through_target) d = d.detach();
    torch::Tensor loss_u = UncertaintyLoss(d, u);
    CheckFinite(loss_u, "uncertainty", step_);
    total = total + w.uncertainty * loss_u;
    report.uncertainty = loss_u.item<double>();
  }
  CheckFinite(total, "generator total", step_);
  opt_g_->zero_grad();
  total.backward();
  opt_g_->step();
  // The generator pass leaves gradients on the discriminator; drop them.
  opt_d_->zero_grad();

  report.adversarial = loss_adv.item<double>();
  report.kl = loss_kl.item<double>();
  report.recon = loss_recon.item<double>();
  report.generator_total = total.item<double>();
  ++step_;
  trace_.push_back(report);
  return report;
}

EpochLog Trainer::TrainEpoch(const std::vector<TrainingExample> &examples) {
  if (examples.empty()) throw std::invalid_argument("no training examples");
  EpochLog log;
  log.epoch = epoch_;
  log.flags = strategy_.FlagsAt(epoch_);
  log.lr = LearningRate(cfg_.optimizer, epoch_);
  SetLearningRate(log.lr);

  const long segment = static_cast<long>(std::floor(cfg_.train.segment_seconds * cfg_.model.FrameRate()));
  torch::Tensor order = torch::randperm(static_cast<long>(examples.size()), rng_, torch::kInt64);
  const auto idx = order.accessor<int64_t, 1>();
  const long n = static_cast<long>(examples.size());
  for (long i = 0; i < n; i += cfg_.train.batch_size) {
    std::vector<const TrainingExample *> members;
    for (long k = i; k < std::min(n, i + cfg_.train.batch_size); ++k) members.push_back(&examples[idx[k]]);
    const LossReport r = TrainStep(MakeBatch(members, segment, rng_), log.flags);
    log.losses.discriminator += r.discriminator;
    log.losses.adversarial += r.adversarial;
    log.losses.kl += r.kl;
    log.losses.recon += r.recon;
    log.losses.feature_match += r.feature_match;
    log.losses.uncertainty += r.uncertainty;
    log.losses.generator_total += r.generator_total;
    ++log.steps;
  }
  for (double *v : {&log.losses.discriminator, &log.losses.adversarial, &log.losses.kl, &log.losses.recon,
                    &log.losses.feature_match, &log.losses.uncertainty, &log.losses.generator_total})
    *v /= log.steps;
  history_.push_back(log);
  ++epoch_;
  return log;
}

CheckpointData Trainer::ToCheckpoint() const {
  CheckpointData data;
  for (const auto &item : generator_->named_parameters()) data.Add("gen/" + item.key(), item.value());
  for (const auto &item : discriminators_->named_parameters()) data.Add("disc/" + item.key(), item.value());
  SaveOptimizer(*opt_g_, *generator_, "g", &data);
  SaveOptimizer(*opt_d_, *discriminators_, "d", &data);
  data.Add("rng", rng_.get_state());
  json history = json::array(), trace = json::array();
  for (const auto &h : history_) history.push_back(h.ToJson());
  for (const auto &t : trace_) trace.push_back(t.ToJson());
  data.metadata = {{"format", "usvs-checkpoint"},
                   {"version", 1},
                   {"epoch", epoch_},
                   {"step", step_},
                   {"strategy", StrategyJson(strategy_)},
                   {"config", ToJson(cfg_)},
                   {"history", history},
                   {"trace", trace}};
  return data;
}

void Trainer::Save(const fs::path &path) const { SaveCheckpoint(path, ToCheckpoint()); }

void Trainer::LoadState(const CheckpointData &data) {
  LoadModule(*generator_, "gen/", data);
  LoadModule(*discriminators_, "disc/", data);
  LoadOptimizer(*opt_g_, *generator_, "g", data);
  LoadOptimizer(*opt_d_, *discriminators_, "d", data);
  rng_.set_state(data.Get("rng"));
  const json &m = data.metadata;
  epoch_ = m.at("epoch");
  step_ = m.at("step");
  history_.clear();
  trace_.clear();
  for (const auto &h : m.at("history")) history_.push_back(EpochLog::FromJson(h));
  for (const auto &t : m.at("trace")) trace_.push_back(LossReport::FromJson(t));
}

std::unique_ptr<Trainer> Trainer::FromCheckpoint(const fs::path &path) {
  const CheckpointData data = LoadCheckpoint(path);
  auto trainer = std::make_unique<Trainer>(ConfigFromJson(data.metadata.at("config")),
                                           StrategyFromJson(data.metadata.at("strategy")));
  trainer->LoadState(data);
  return trainer;
}

Synthesizer LoadSynthesizer(const fs::path &checkpoint, Config *config) {
  const CheckpointData data = LoadCheckpoint(checkpoint);
  const Config cfg = ConfigFromJson(data.metadata.at("config"));
  Synthesizer s(cfg.model, cfg.uncertainty);
  LoadModule(*s, "gen/", data);
  s->eval();
  if (config != nullptr) *config = cfg;
  return s;
}

RunResult RunStrategy(const TrainingStrategy &strategy, const CorpusManifest &corpus, const Config &cfg,
                      const RunOptions &options) {
  std::unique_ptr<Trainer> trainer;
  if (options.resume) {
    trainer = Trainer::FromCheckpoint(*options.resume);
    if (trainer->strategy().name != strategy.name)
      throw std::runtime_error("resume: checkpoint " + options.resume->string() + " was trained with strategy '" +
                               trainer->strategy().name + "', not '" + strategy.name + "'");
  } else {
    trainer = std::make_unique<Trainer>(cfg, strategy);
  }
  fs::create_directories(options.out_dir);
  const auto examples = LoadExamples(corpus, "train", trainer->config().model);

  RunResult result;
  result.log_path = options.out_dir / "train_log.jsonl";
  if (options.resume) result.final_checkpoint = *options.resume;
  std::vector<fs::path> written;
  while (trainer->epoch() < cfg.train.epochs) {
    const EpochLog log = trainer->TrainEpoch(examples);
    char name[64];
    std::snprintf(name, sizeof(name), "ckpt_epoch%03d.bin", log.epoch);
    result.final_checkpoint = options.out_dir / name;
    trainer->Save(result.final_checkpoint);
    written.push_back(result.final_checkpoint);
    const int keep = trainer->config().train.keep_checkpoints;
    while (keep > 0 && static_cast<int>(written.size()) > keep) {
      fs::remove(written.front());
      written.erase(written.begin());
    }
    {
      std::ofstream os(result.log_path, std::ios::trunc);
      if (!os) throw std::runtime_error("cannot write " + result.log_path.string());
      for (const auto &h : trainer->history()) os << h.ToJson().dump() << '\n';
    }
    if (options.verbose)
      std::cerr << "epoch " << log.epoch << " lr " << log.lr << " " << log.losses.ToJson().dump() << std::endl;
  }
  result.log = trainer->history();
  result.trace = trainer->trace();
  return result;
}

}  // namespace usvs
