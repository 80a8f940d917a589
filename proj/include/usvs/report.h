// include/usvs/report.h

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

#ifndef USVS_REPORT_H_
#define USVS_REPORT_H_

#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "usvs/eval.h"

namespace usvs {

/// Aligned plain-text table, one row per report: Log_F0_RMSE and MCD to three
/// decimals, Semitone and VUV as percentages with two decimals.
std::string FormatReportTable(std::span<const MetricReport> reports);

nlohmann::json ReportToJson(const MetricReport &report);

/// Normalized log-mel panels (n_mels x frames, values in [0,1]) for a ref/hyp
/// pair, trimmed to a shared time axis and scaled with a shared colour range.
std::pair<dsp::Matrix, dsp::Matrix> SpectrogramPanels(std::span<const double> ref,
                                                      std::span<const double> hyp, int sample_rate,
                                                      const EvalConfig &config = {});

/// Writes a stacked two-panel PNG (reference on top) annotated with `id`.
void RenderComparisonPlot(const std::filesystem::path &ref_wav, const std::filesystem::path &hyp_wav,
                          const std::string &id, const std::filesystem::path &out_png,
                          const EvalConfig &config = {});

struct PlotPair {
  std::filesystem::path ref;
  std::filesystem::path hyp;
};

/// Writes the table to out_path, the JSON sidecar next to it (extension
/// replaced by .json) and one PNG per plot pair in the same directory.
/// Returns every file written.
std::vector<std::filesystem::path> RenderReport(std::span<const MetricReport> reports,
                                                const std::filesystem::path &out_path,
                                                std::span<const PlotPair> plots = {},
                                                const EvalConfig &config = {});

}  // namespace usvs

#endif  // USVS_REPORT_H_
