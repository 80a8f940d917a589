// include/usvs/experiments.h

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

#ifndef USVS_EXPERIMENTS_H_
#define USVS_EXPERIMENTS_H_

#include <filesystem>
#include <string>
#include <vector>

#include "usvs/config.h"
#include "usvs/corpus.h"
#include "usvs/eval.h"
#include "usvs/synthesizer.h"
#include "usvs/train.h"

namespace usvs {

/// Sample Pearson correlation; throws on size mismatch or fewer than 2 points,
/// returns 0 when either side has zero variance.
double Pearson(const std::vector<double> &a, const std::vector<double> &b);

struct UncertaintyCurve {
  std::string id;
  long window = 0;  // index of the 1 s window inside the utterance
  std::vector<double> u, d;
};

struct UncertaintyEvaluation {
  std::vector<UncertaintyCurve> curves;
  double pearson = 0.0;  // pooled over every grid point of every curve
};

/// Splits each example into consecutive non-overlapping windows of
/// `segment_frames` (a shorter utterance is one window), decodes the prior
/// sample with z drawn from `seed` and compares g(l_z) with the measured d.
UncertaintyEvaluation EvaluateUncertainty(Synthesizer &model, const std::vector<TrainingExample> &examples,
                                          long segment_frames, long grid, std::uint64_t seed);

/// Writes "t u_t d_t" lines, one file per curve, under dir.
void DumpUncertainty(const UncertaintyEvaluation &eval, const std::filesystem::path &dir);

/// Synthesizes every utterance of `split` to out_dir/<id>.wav. The z seed of
/// utterance i is seed + i.
std::vector<std::filesystem::path> SynthesizeSplit(Synthesizer &model, const CorpusManifest &corpus,
                                                   std::string_view split, const std::filesystem::path &out_dir,
                                                   std::uint64_t seed);

struct AblationCell {
  std::string mode;
  std::filesystem::path run_dir;
  std::filesystem::path report;
  MetricReport metrics;
};

/// For each augmentation mode in {mask, noise, mask+noise}: train B+D, render
/// the test split, evaluate it against the corpus audio and write a report
/// under out_dir/<mode>/. A summary table covering every cell is written to
/// out_dir/summary.txt.
std::vector<AblationCell> RunAblation(const CorpusManifest &corpus, const Config &base,
                                      const std::filesystem::path &out_dir, bool verbose = false);

}  // namespace usvs

#endif  // USVS_EXPERIMENTS_H_
