// include/usvs/eval.h

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

#ifndef USVS_EVAL_H_
#define USVS_EVAL_H_

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "usvs/dsp.h"

namespace usvs {

/// RMSE of natural-log F0 over frames voiced in both tracks (trimmed to the
/// shorter track). Empty when no frame is voiced in both.
std::optional<double> LogF0Rmse(const dsp::PitchTrack &ref, const dsp::PitchTrack &hyp);

/// Mel-cepstral distortion, coefficient 0 excluded, averaged over frames.
double MelCepstralDistortion(const dsp::McepSequence &ref, const dsp::McepSequence &hyp);

/// Percentage of mutually voiced frames rounding to the same MIDI semitone.
std::optional<double> SemitoneAccuracy(const dsp::PitchTrack &ref, const dsp::PitchTrack &hyp);

/// Percentage of frames whose voicing decisions differ.
double VuvError(const dsp::PitchTrack &ref, const dsp::PitchTrack &hyp);

struct EvalConfig {
  dsp::StftOptions stft;
  dsp::MelOptions mel;
  dsp::PitchOptions pitch;
  int mcep_order = 13;
  std::string system = "system";
};

struct UtteranceMetrics {
  std::string id;
  std::optional<double> log_f0_rmse;
  double mcd = 0.0;
  std::optional<double> semitone_accuracy;
  double vuv_error = 0.0;
  int f0_frames = 0;   // mutually voiced frames
  int mcd_frames = 0;
  int vuv_frames = 0;
};

struct MetricReport {
  std::string system;
  std::vector<UtteranceMetrics> utterances;
  std::optional<double> log_f0_rmse;
  std::optional<double> mcd;
  std::optional<double> semitone_accuracy;
  std::optional<double> vuv_error;
  int log_f0_count = 0;  // utterances contributing to each mean
  int mcd_count = 0;
  int semitone_count = 0;
  int vuv_count = 0;
  std::vector<std::string> warnings;

  /// Recomputes the corpus means from the per-utterance values.
  void Aggregate();
};

UtteranceMetrics EvaluatePair(const std::string &id, std::span<const double> ref,
                              std::span<const double> hyp, int sample_rate,
                              const EvalConfig &config = {});

/// Pairs *.wav files by stem. Unmatched files are skipped with a warning;
/// an empty intersection throws.
MetricReport EvaluateCorpus(const std::filesystem::path &ref_dir,
                            const std::filesystem::path &hyp_dir, const EvalConfig &config = {});

}  // namespace usvs

#endif  // USVS_EVAL_H_
