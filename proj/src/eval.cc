// src/eval.cc

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

#include "usvs/eval.h"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <map>
#include <numbers>
#include <stdexcept>

#include "usvs/wav_io.h"

namespace usvs {

namespace fs = std::filesystem;

namespace {

double MidiNumber(double hz) { return 69.0 + 12.0 * std::log2(hz / 440.0); }

std::map<std::string, fs::path> WavsByStem(const fs::path &dir) {
  if (!fs::is_directory(dir)) throw std::runtime_error(dir.string() + " is not a directory");
  std::map<std::string, fs::path> out;
  for (const auto &entry : fs::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".wav")
      out[entry.path().stem().string()] = entry.path();
  return out;
}

template <typename T>
std::optional<double> MeanOf(const std::vector<UtteranceMetrics> &utts, T getter, int *count) {
  double sum = 0.0;
  *count = 0;
  for (const auto &u : utts) {
    if (auto v = getter(u)) {
      sum += *v;
      ++*count;
    }
  }
  if (*count == 0) return std::nullopt;
  return sum / *count;
}

}  // namespace

std::optional<double> LogF0Rmse(const dsp::PitchTrack &ref, const dsp::PitchTrack &hyp) {
  const std::size_t n = std::min(ref.frames(), hyp.frames());
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t t = 0; t < n; ++t) {
    if (!ref.voiced[t] || !hyp.voiced[t]) continue;
    const double d = std::log(ref.f0[t]) - std::log(hyp.f0[t]);
    sum += d * d;
    ++count;
  }
  if (count == 0) return std::nullopt;
  return std::sqrt(sum / count);
}

double MelCepstralDistortion(const dsp::McepSequence &ref, const dsp::McepSequence &hyp) {
  if (ref.order != hyp.order)
    throw std::invalid_argument("MCD: cepstral orders differ (" + std::to_string(ref.order) + " vs " +
                                std::to_string(hyp.order) + ")");
  const Eigen::Index n = std::min(ref.frames(), hyp.frames());
  if (n == 0) throw std::invalid_argument("MCD: no overlapping frames");
  const double scale = 10.0 * std::numbers::sqrt2 / std::numbers::ln10;
  double total = 0.0;
  for (Eigen::Index t = 0; t < n; ++t) {
    double sq = 0.0;
    for (int k = 1; k <= ref.order; ++k) {
      const double d = ref.coefficients(t, k) - hyp.coefficients(t, k);
      sq += d * d;
    }
    total += scale * std::sqrt(sq);
  }
  return total / static_cast<double>(n);
}

std::optional<double> SemitoneAccuracy(const dsp::PitchTrack &ref, const dsp::PitchTrack &hyp) {
  const std::size_t n = std::min(ref.frames(), hyp.frames());
  std::size_t hits = 0, count = 0;
  for (std::size_t t = 0; t < n; ++t) {
    if (!ref.voiced[t] || !hyp.voiced[t]) continue;
    ++count;
    if (std::lround(MidiNumber(ref.f0[t])) == std::lround(MidiNumber(hyp.f0[t]))) ++hits;
  }
  if (count == 0) return std::nullopt;
  return 100.0 * static_cast<double>(hits) / static_cast<double>(count);
}

double VuvError(const dsp::PitchTrack &ref, const dsp::PitchTrack &hyp) {
  const std::size_t n = std::min(ref.frames(), hyp.frames());
  if (n == 0) return 0.0;
  std::size_t diff = 0;
  for (std::size_t t = 0; t < n; ++t)
    if (ref.voiced[t] != hyp.voiced[t]) ++diff;
  return 100.0 * static_cast<double>(diff) / static_cast<double>(n);
}

void MetricReport::Aggregate() {
  log_f0_rmse = MeanOf(utterances, [](const UtteranceMetrics &u) { return u.log_f0_rmse; }, &log_f0_count);
  mcd = MeanOf(
      utterances,
      [](const UtteranceMetrics &u) { return u.mcd_frames > 0 ? std::optional(u.mcd) : std::nullopt; },
      &mcd_count);
  semitone_accuracy =
      MeanOf(utterances, [](const UtteranceMetrics &u) { return u.semitone_accuracy; }, &semitone_count);
  vuv_error = MeanOf(
      utterances,
      [](const UtteranceMetrics &u) { return u.vuv_frames > 0 ? std::optional(u.vuv_error) : std::nullopt; },
      &vuv_count);
}

UtteranceMetrics EvaluatePair(const std::string &id, std::span<const double> ref,
                              std::span<const double> hyp, int sample_rate, const EvalConfig &config) {
  UtteranceMetrics m;
  m.id = id;
  const auto f0_ref = dsp::ExtractF0(ref, sample_rate, config.pitch);
  const auto f0_hyp = dsp::ExtractF0(hyp, sample_rate, config.pitch);
  m.log_f0_rmse = LogF0Rmse(f0_ref, f0_hyp);
  m.semitone_accuracy = SemitoneAccuracy(f0_ref, f0_hyp);
  m.vuv_error = VuvError(f0_ref, f0_hyp);
  m.vuv_frames = static_cast<int>(std::min(f0_ref.frames(), f0_hyp.frames()));
  for (int t = 0; t < m.vuv_frames; ++t)
    if (f0_ref.voiced[t] && f0_hyp.voiced[t]) ++m.f0_frames;

  const auto mc_ref = dsp::ExtractMcep(dsp::LogMel(ref, sample_rate, config.stft, config.mel), config.mcep_order);
  const auto mc_hyp = dsp::ExtractMcep(dsp::LogMel(hyp, sample_rate, config.stft, config.mel), config.mcep_order);
  m.mcd = MelCepstralDistortion(mc_ref, mc_hyp);
  m.mcd_frames = static_cast<int>(std::min(mc_ref.frames(), mc_hyp.frames()));
  return m;
}

MetricReport EvaluateCorpus(const fs::path &ref_dir, const fs::path &hyp_dir, const EvalConfig &config) {
  const auto refs = WavsByStem(ref_dir);
  const auto hyps = WavsByStem(hyp_dir);
  MetricReport report;
  report.system = config.system;
  for (const auto &[id, hyp_path] : hyps) {
    auto it = refs.find(id);
    if (it == refs.end()) {
      report.warnings.push_back("no reference for '" + id + "', skipped");
      continue;
    }
    const WavData ref = ReadWav(it->second);
    const WavData hyp = ReadWav(hyp_path);
    if (ref.sample_rate != hyp.sample_rate) {
      report.warnings.push_back("sample rates differ for '" + id + "', skipped");
      continue;
    }
    report.utterances.push_back(EvaluatePair(id, ref.samples, hyp.samples, ref.sample_rate, config));
  }
  for (const auto &w : report.warnings) std::cerr << "WARNING: " << w << '\n';
  if (report.utterances.empty())
    throw std::runtime_error("no matching utterance ids between " + ref_dir.string() + " and " +
                             hyp_dir.string());
  report.Aggregate();
  return report;
}

}  // namespace usvs
