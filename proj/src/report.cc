// src/report.cc

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

#include "usvs/report.h"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "usvs/wav_io.h"

namespace usvs {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string Fixed(std::optional<double> v, int decimals, bool percent) {
  if (!v) return "-";
  char buf[64];
  std::snprintf(buf, sizeof(buf), percent ? "%.*f%%" : "%.*f", decimals, *v);
  return buf;
}

json Optional(std::optional<double> v) { return v ? json(*v) : json(nullptr); }

constexpr int kRowScale = 3;    // pixels per mel bin
constexpr int kColScale = 2;    // pixels per frame
constexpr int kTitleHeight = 24;
constexpr int kAxisHeight = 22;
constexpr int kGap = 6;

cv::Mat PanelImage(const dsp::Matrix &panel) {
  // Low mel bins at the bottom.
  cv::Mat gray(static_cast<int>(panel.rows()), static_cast<int>(panel.cols()), CV_8UC1);
  for (Eigen::Index m = 0; m < panel.rows(); ++m)
    for (Eigen::Index t = 0; t < panel.cols(); ++t)
      gray.at<unsigned char>(static_cast<int>(panel.rows() - 1 - m), static_cast<int>(t)) =
          static_cast<unsigned char>(std::lround(255.0 * std::clamp(panel(m, t), 0.0, 1.0)));
  cv::Mat big, colour;
  cv::resize(gray, big, cv::Size(gray.cols * kColScale, gray.rows * kRowScale), 0, 0, cv::INTER_NEAREST);
  cv::applyColorMap(big, colour, cv::COLORMAP_VIRIDIS);
  return colour;
}

}  // namespace

std::string FormatReportTable(std::span<const MetricReport> reports) {
  const std::vector<std::string> header = {"System", "Log_F0_RMSE", "MCD", "Semitone", "VUV", "Utts"};
  std::vector<std::vector<std::string>> rows;
  for (const auto &r : reports)
    rows.push_back({r.system, Fixed(r.log_f0_rmse, 3, false), Fixed(r.mcd, 3, false),
                    Fixed(r.semitone_accuracy, 2, true), Fixed(r.vuv_error, 2, true),
                    std::to_string(r.utterances.size())});
  std::vector<std::size_t> width(header.size());
  for (std::size_t c = 0; c < header.size(); ++c) {
    width[c] = header[c].size();
    for (const auto &row : rows) width[c] = std::max(width[c], row[c].size());
  }
  auto line = [&](const std::vector<std::string> &cells) {
    std::string out;
    for (std::size_t c = 0; c < cells.size(); ++c) {
      std::string cell = cells[c];
      if (c == 0)
        cell.resize(width[c], ' ');
      else
        cell.insert(0, width[c] - cell.size(), ' ');
      out += cell;
      out += c + 1 < cells.size() ? "  " : "\n";
    }
    return out;
  };
  std::string out = line(header);
  std::size_t total = 0;
  for (auto w : width) total += w + 2;
  out += std::string(total - 2, '-') + "\n";
  for (const auto &row : rows) out += line(row);
  return out;
}

json ReportToJson(const MetricReport &report) {
  json utts = json::array();
  for (const auto &u : report.utterances)
    utts.push_back({{"id", u.id},
                    {"log_f0_rmse", Optional(u.log_f0_rmse)},
                    {"mcd", u.mcd},
                    {"semitone_accuracy", Optional(u.semitone_accuracy)},
                    {"vuv_error", u.vuv_error},
                    {"f0_frames", u.f0_frames},
                    {"mcd_frames", u.mcd_frames},
                    {"vuv_frames", u.vuv_frames}});
  return {{"system", report.system},
          {"means",
           {{"log_f0_rmse", Optional(report.log_f0_rmse)},
            {"mcd", Optional(report.mcd)},
            {"semitone_accuracy", Optional(report.semitone_accuracy)},
            {"vuv_error", Optional(report.vuv_error)}}},
          {"counts",
           {{"log_f0_rmse", report.log_f0_count},
            {"mcd", report.mcd_count},
            {"semitone_accuracy", report.semitone_count},
            {"vuv_error", report.vuv_count}}},
          {"utterances", utts},
          {"warnings", report.warnings}};
}

std::pair<dsp::Matrix, dsp::Matrix> SpectrogramPanels(std::span<const double> ref,
                                                      std::span<const double> hyp, int sample_rate,
                                                      const EvalConfig &config) {
  const auto mel_ref = dsp::LogMel(ref, sample_rate, config.stft, config.mel);
  const auto mel_hyp = dsp::LogMel(hyp, sample_rate, config.stft, config.mel);
  const Eigen::Index frames = std::min(mel_ref.frames(), mel_hyp.frames());
  dsp::Matrix a = mel_ref.values.topRows(frames).transpose();
  dsp::Matrix b = mel_hyp.values.topRows(frames).transpose();
  const double lo = std::min(a.minCoeff(), b.minCoeff());
  const double hi = std::max(a.maxCoeff(), b.maxCoeff());
  const double span = hi > lo ? hi - lo : 1.0;
  a = (a.array() - lo) / span;
  b = (b.array() - lo) / span;
  return {std::move(a), std::move(b)};
}

void RenderComparisonPlot(const fs::path &ref_wav, const fs::path &hyp_wav, const std::string &id,
                          const fs::path &out_png, const EvalConfig &config) {
  const WavData ref = ReadWav(ref_wav);
  const WavData hyp = ReadWav(hyp_wav);
  if (ref.sample_rate != hyp.sample_rate)
    throw std::invalid_argument("plot: sample rates differ for " + id);
  auto [top, bottom] = SpectrogramPanels(ref.samples, hyp.samples, ref.sample_rate, config);
  cv::Mat p1 = PanelImage(top), p2 = PanelImage(bottom);

  const int width = p1.cols;
  const int height = kTitleHeight + p1.rows + kGap + p2.rows + kAxisHeight;
  cv::Mat canvas(height, width, CV_8UC3, cv::Scalar(255, 255, 255));
  p1.copyTo(canvas(cv::Rect(0, kTitleHeight, width, p1.rows)));
  p2.copyTo(canvas(cv::Rect(0, kTitleHeight + p1.rows + kGap, width, p2.rows)));

  const auto font = cv::FONT_HERSHEY_SIMPLEX;
  cv::putText(canvas, id + "  (top: reference, bottom: synthesized)", cv::Point(4, 17), font, 0.45,
              cv::Scalar(0, 0, 0), 1, cv::LINE_AA);
  // Shared time axis: one tick per second.
  const double frames_per_second = static_cast<double>(ref.sample_rate) / config.stft.hop_length;
  const int axis_y = kTitleHeight + p1.rows + kGap + p2.rows;
  for (int s = 0;; ++s) {
    const int x = static_cast<int>(std::lround(s * frames_per_second * kColScale));
    if (x >= width) break;
    cv::line(canvas, cv::Point(x, axis_y), cv::Point(x, axis_y + 5), cv::Scalar(0, 0, 0));
    cv::putText(canvas, std::to_string(s) + "s", cv::Point(std::min(x + 2, width - 20), axis_y + 17), font,
                0.4, cv::Scalar(0, 0, 0), 1, cv::LINE_AA);
  }
  if (!cv::imwrite(out_png.string(), canvas))
    throw std::runtime_error("cannot write plot " + out_png.string());
}

std::vector<fs::path> RenderReport(std::span<const MetricReport> reports, const fs::path &out_path,
                                   std::span<const PlotPair> plots, const EvalConfig &config) {
  std::vector<fs::path> written;
  if (out_path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(out_path.parent_path(), ec);
  }
  {
    std::ofstream os(out_path, std::ios::trunc);
    if (!os) throw std::runtime_error("cannot write report " + out_path.string());
    os << FormatReportTable(reports);
    if (!os) throw std::runtime_error("failed writing report " + out_path.string());
  }
  written.push_back(out_path);

  fs::path sidecar = out_path;
  sidecar.replace_extension(out_path.extension() == ".json" ? ".report.json" : ".json");
  json systems = json::array();
  for (const auto &r : reports) systems.push_back(ReportToJson(r));
  {
    std::ofstream os(sidecar, std::ios::trunc);
    if (!os) throw std::runtime_error("cannot write report sidecar " + sidecar.string());
    os << json{{"systems", systems}}.dump(2) << '\n';
  }
  written.push_back(sidecar);

  const fs::path dir = out_path.has_parent_path() ? out_path.parent_path() : fs::path(".");
  for (const auto &pair : plots) {
    const std::string id = pair.hyp.stem().string();
    const fs::path png = dir / (id + "_spectrogram.png");
    RenderComparisonPlot(pair.ref, pair.hyp, id, png, config);
    written.push_back(png);
  }
  return written;
}

}  // namespace usvs
