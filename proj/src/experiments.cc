// src/experiments.cc

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

#include "usvs/experiments.h"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include "usvs/report.h"
#include "usvs/wav_io.h"

namespace usvs {

namespace fs = std::filesystem;

double Pearson(const std::vector<double> &a, const std::vector<double> &b) {
  if (a.size() != b.size()) throw std::invalid_argument("pearson: size mismatch");
  if (a.size() < 2) throw std::invalid_argument("pearson: need at least two points");
  const double n = static_cast<double>(a.size());
  double ma = 0, mb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) return 0.0;
  return sab / std::sqrt(saa * sbb);
}

UncertaintyEvaluation EvaluateUncertainty(Synthesizer &model, const std::vector<TrainingExample> &examples,
                                          long segment_frames, long grid, std::uint64_t seed) {
  torch::NoGradGuard no_grad;
  model->eval();
  at::Generator gen = at::detail::createCPUGenerator(seed);
  const long hop = model->config.hop_length;
  UncertaintyEvaluation out;
  std::vector<double> all_u, all_d;
  for (const auto &ex : examples) {
    const long frames = ex.frames();
    const long windows = std::max(1L, frames / segment_frames);
    for (long w = 0; w < windows; ++w) {
      const long len = frames < segment_frames ? frames : segment_frames;
      const long start = w * len;
      if (len * hop < grid) continue;
      torch::Tensor ph = ex.phonemes.narrow(0, start, len).unsqueeze(0);
      torch::Tensor pitch = ex.pitches.narrow(0, start, len).unsqueeze(0);
      torch::Tensor x = ex.wave.narrow(0, start * hop, len * hop).unsqueeze(0);
      torch::Tensor z = torch::randn({1, model->config.latent_dim, len}, gen, torch::kFloat32);
      torch::Tensor lz = model->EncodePrior(ph, pitch, z).first;
      torch::Tensor u = model->predictor(lz).squeeze(0).to(torch::kFloat64).contiguous();
      torch::Tensor d = TargetDistance(x, model->Decode(lz), grid).squeeze(0).to(torch::kFloat64).contiguous();
      UncertaintyCurve c;
      c.id = ex.id;
      c.window = w;
      c.u.assign(u.data_ptr<double>(), u.data_ptr<double>() + u.numel());
      c.d.assign(d.data_ptr<double>(), d.data_ptr<double>() + d.numel());
      all_u.insert(all_u.end(), c.u.begin(), c.u.end());
      all_d.insert(all_d.end(), c.d.begin(), c.d.end());
      out.curves.push_back(std::move(c));
    }
  }
  if (all_u.size() >= 2) out.pearson = Pearson(all_u, all_d);
  return out;
}

void DumpUncertainty(const UncertaintyEvaluation &eval, const fs::path &dir) {
  fs::create_directories(dir);
  for (const auto &c : eval.curves) {
    const fs::path path = dir / (c.id + "_w" + std::to_string(c.window) + ".uncertainty.txt");
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write " + path.string());
    os << "# t u_t d_t\n";
    for (std::size_t t = 0; t < c.u.size(); ++t) os << t << ' ' << c.u[t] << ' ' << c.d[t] << '\n';
  }
}

std::vector<fs::path> SynthesizeSplit(Synthesizer &model, const CorpusManifest &corpus, std::string_view split,
                                      const fs::path &out_dir, std::uint64_t seed) {
  fs::create_directories(out_dir);
  std::vector<fs::path> written;
  std::uint64_t i = 0;
  for (const auto &id : SplitManifest(corpus, split)) {
    const MusicScore score = LoadScoreFile(corpus.ScorePath(corpus.Find(id)));
    const fs::path path = out_dir / (id + ".wav");
    WriteWav(path, model->Synthesize(score, seed + i++), model->config.sample_rate);
    written.push_back(path);
  }
  return written;
}

std::vector<AblationCell> RunAblation(const CorpusManifest &corpus, const Config &base, const fs::path &out_dir,
                                      bool verbose) {
  const std::vector<std::pair<AugmentMode, std::string>> modes = {
      {AugmentMode::kMask, "mask"}, {AugmentMode::kNoise, "noise"}, {AugmentMode::kMaskNoise, "mask_noise"}};
  std::vector<AblationCell> cells;
  std::vector<MetricReport> reports;
  const auto ids = SplitManifest(corpus, "test");
  if (ids.empty()) throw std::invalid_argument("ablation: test split is empty");
  const fs::path ref_dir = corpus.AudioPath(corpus.Find(ids.front())).parent_path();
  for (const auto &[mode, dir] : modes) {
    Config cfg = base;
    cfg.augment.enabled = true;
    cfg.augment.mode = mode;
    AblationCell cell;
    cell.mode = AugmentModeName(mode);
    cell.run_dir = out_dir / dir;
    RunOptions opts;
    opts.out_dir = cell.run_dir;
    opts.verbose = verbose;
    const RunResult run = RunStrategy(MakeStrategy("B+D", cfg.schedule, cfg.train.epochs), corpus, cfg, opts);
    Synthesizer model = LoadSynthesizer(run.final_checkpoint);
    SynthesizeSplit(model, corpus, "test", cell.run_dir / "synth", cfg.train.seed);
    cell.metrics = EvaluateCorpus(ref_dir, cell.run_dir / "synth");
    cell.metrics.system = "B+D[" + cell.mode + "]";
    cell.report = cell.run_dir / "report.txt";
    const std::vector<PlotPair> plots = {{ref_dir / (ids.front() + ".wav"), cell.run_dir / "synth" / (ids.front() + ".wav")}};
    RenderReport(std::span(&cell.metrics, 1), cell.report, plots);
    reports.push_back(cell.metrics);
    cells.push_back(std::move(cell));
  }
  RenderReport(reports, out_dir / "summary.txt");
  return cells;
}

}  // namespace usvs
