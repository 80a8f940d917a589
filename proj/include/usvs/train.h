// include/usvs/train.h

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

#ifndef USVS_TRAIN_H_
#define USVS_TRAIN_H_

#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <torch/torch.h>

#include "json.hpp"
#include "usvs/checkpoint.h"
#include "usvs/config.h"
#include "usvs/corpus.h"
#include "usvs/discriminators.h"
#include "usvs/synthesizer.h"

namespace usvs {

struct StageFlags {
  bool augment_on = false;
  bool uncertainty_on = false;
  bool operator==(const StageFlags &) const = default;
};

/// Named staged strategy: each schedule entry switches the flags on from its
/// start epoch (0-based) onwards.
struct TrainingStrategy {
  std::string name;
  std::vector<std::pair<int, StageFlags>> schedule;
  StageFlags FlagsAt(int epoch) const;
};

/// "B", "B+D", "B&U", "B&U&(U+D)".
const std::vector<std::string> &StrategyNames();
/// Accepts the canonical names and the aliases b, bd, bu, bud; throws
/// std::invalid_argument listing the valid names otherwise.
std::string CanonicalStrategyName(const std::string &name);
/// Thresholds come from `schedule`; with scale_schedule they are scaled by
/// total_epochs / reference_epochs and rounded.
TrainingStrategy MakeStrategy(const std::string &name, const ScheduleConfig &schedule, int total_epochs);

/// lr * lr_decay^epoch.
double LearningRate(const OptimizerConfig &opt, int epoch);

/// One utterance prepared for training: float waveform trimmed to whole
/// frames and frame-level score ids of the same length.
struct TrainingExample {
  std::string id;
  torch::Tensor wave;      // [frames * hop] float32
  torch::Tensor phonemes;  // [frames] int64
  torch::Tensor pitches;   // [frames] int64
  long frames() const { return phonemes.size(0); }
};

TrainingExample MakeExample(const std::string &id, const std::vector<double> &waveform, const MusicScore &score,
                            const ModelConfig &cfg);
std::vector<TrainingExample> LoadExamples(const CorpusManifest &manifest, std::string_view split,
                                          const ModelConfig &cfg);

struct Batch {
  std::vector<std::string> ids;
  torch::Tensor wave;      // [B, S * hop]
  torch::Tensor phonemes;  // [B, S]
  torch::Tensor pitches;   // [B, S]
};

/// Random aligned crops of `segment_frames` (or the shortest example, if less).
Batch MakeBatch(const std::vector<const TrainingExample *> &examples, long segment_frames, at::Generator &gen);

struct LossReport {
  double discriminator = 0.0;
  double adversarial = 0.0;
  double kl = 0.0;
  double recon = 0.0;
  double feature_match = 0.0;
  double uncertainty = 0.0;
  double generator_total = 0.0;

  nlohmann::json ToJson() const;
  static LossReport FromJson(const nlohmann::json &j);
  bool operator==(const LossReport &) const = default;
};

struct EpochLog {
  int epoch = 0;
  StageFlags flags;
  double lr = 0.0;
  LossReport losses;  // means over the epoch's steps
  int steps = 0;

  nlohmann::json ToJson() const;
  static EpochLog FromJson(const nlohmann::json &j);
};

enum class TrainPhase { kDiscriminator, kGenerator };

/// Called with the discriminator outputs (features as seen by the heads).
/// In the discriminator phase `real` and `fake` are both set; in the generator
/// phase only `fake`.
using FeatureHook = std::function<void(TrainPhase phase, const std::vector<DiscriminatorOutput> *real,
                                       const std::vector<DiscriminatorOutput> &fake)>;

class Trainer {
 public:
  Trainer(const Config &cfg, TrainingStrategy strategy);
  /// Restores configuration, weights, optimizer moments, RNG and history.
  static std::unique_ptr<Trainer> FromCheckpoint(const std::filesystem::path &path);

  /// One discriminator update followed by one generator update.
  LossReport TrainStep(const Batch &batch, const StageFlags &flags);
  /// Runs one epoch with the strategy flags and lr of the current epoch.
  EpochLog TrainEpoch(const std::vector<TrainingExample> &examples);

  CheckpointData ToCheckpoint() const;
  void Save(const std::filesystem::path &path) const;

  Synthesizer &generator() { return generator_; }
  DiscriminatorBundle &discriminators() { return discriminators_; }
  at::Generator &rng() { return rng_; }
  const Config &config() const { return cfg_; }
  const TrainingStrategy &strategy() const { return strategy_; }
  int epoch() const { return epoch_; }
  long step() const { return step_; }
  const std::vector<EpochLog> &history() const { return history_; }
  const std::vector<LossReport> &trace() const { return trace_; }
  void SetLearningRate(double lr);

  FeatureHook feature_hook;

 private:
  void LoadState(const CheckpointData &data);

  Config cfg_;
  TrainingStrategy strategy_;
  Synthesizer generator_{nullptr};
  DiscriminatorBundle discriminators_{nullptr};
  std::unique_ptr<torch::optim::AdamW> opt_g_, opt_d_;
  at::Generator rng_;
  int epoch_ = 0;
  long step_ = 0;
  std::vector<EpochLog> history_;
  std::vector<LossReport> trace_;
};

/// Loads only the generator side of a checkpoint, for synthesis.
Synthesizer LoadSynthesizer(const std::filesystem::path &checkpoint, Config *config = nullptr);

struct RunOptions {
  std::filesystem::path out_dir;
  std::optional<std::filesystem::path> resume;
  bool verbose = false;
};

struct RunResult {
  std::filesystem::path final_checkpoint;
  std::filesystem::path log_path;
  std::vector<EpochLog> log;
  std::vector<LossReport> trace;
};

/// Trains `cfg.train.epochs` epochs (continuing from `resume` if given),
/// writing ckpt_epochNNN.bin and train_log.jsonl under out_dir.
RunResult RunStrategy(const TrainingStrategy &strategy, const CorpusManifest &corpus, const Config &cfg,
                      const RunOptions &options);

}  // namespace usvs

#endif  // USVS_TRAIN_H_
