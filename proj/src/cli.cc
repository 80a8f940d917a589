// src/cli.cc

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

#include "usvs/cli.h"

#include <fstream>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "json.hpp"
#include "usvs/config.h"
#include "usvs/corpus.h"
#include "usvs/eval.h"
#include "usvs/experiments.h"
#include "usvs/report.h"
#include "usvs/train.h"
#include "usvs/wav_io.h"

namespace usvs {

namespace fs = std::filesystem;
using nlohmann::json;

const char *Version() { return USVS_VERSION; }

namespace {

void WriteRunJson(const fs::path &dir, const std::vector<std::string> &args, const std::string &subcommand,
                  const json &config, std::uint64_t seed) {
  fs::create_directories(dir);
  std::ofstream os(dir / "run.json", std::ios::trunc);
  if (!os) throw std::runtime_error("cannot write " + (dir / "run.json").string());
  os << json{{"argv", args}, {"subcommand", subcommand}, {"config", config}, {"seed", seed}, {"version", Version()}}
            .dump(2)
     << '\n';
}

fs::path DirOf(const fs::path &file) { return file.has_parent_path() ? file.parent_path() : fs::path("."); }

}  // namespace

int Dispatch(const std::vector<std::string> &args) {
  CLI::App app{"usvs: toy singing voice synthesis with prior/posterior uncertainty", "usvs"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(Version()));

  // gen-corpus
  auto *gen = app.add_subcommand("gen-corpus", "Generate a synthetic score/audio corpus");
  std::string gen_out;
  int num_utts = 50, sample_rate = 16000;
  std::uint64_t gen_seed = 0;
  bool vibrato = false;
  gen->add_option("--out", gen_out, "Output directory")->required();
  gen->add_option("--num-utts", num_utts, "Number of utterances")->check(CLI::Range(3, 100000));
  gen->add_option("--seed", gen_seed, "Root seed");
  gen->add_option("--sample-rate", sample_rate, "Sample rate in Hz")->check(CLI::Range(8000, 192000));
  gen->add_flag("--vibrato", vibrato, "Render 5 Hz vibrato");

  // train
  auto *train = app.add_subcommand("train", "Train one strategy");
  std::string corpus_dir, strategy_name, train_out, config_path, resume;
  std::optional<int> epochs;
  std::optional<std::uint64_t> train_seed;
  std::vector<std::string> overrides;
  bool scale_schedule = false, verbose = false;
  train->add_option("--corpus", corpus_dir, "Corpus directory (manifest.jsonl)")->required();
  train->add_option("--strategy", strategy_name, "B, B+D, B&U or B&U&(U+D) (aliases b, bd, bu, bud)")
      ->required()
      ->check([](const std::string &s) {
        try {
          CanonicalStrategyName(s);
          return std::string();
        } catch (const std::invalid_argument &e) {
          return std::string(e.what());
        }
      });
  train->add_option("--out", train_out, "Run directory")->required();
  train->add_option("--epochs", epochs, "Number of epochs")->check(CLI::PositiveNumber);
  train->add_option("--config", config_path, "JSON config")->check(CLI::ExistingFile);
  train->add_option("--resume", resume, "Checkpoint to resume from")->check(CLI::ExistingFile);
  train->add_option("--seed", train_seed, "Root seed");
  train->add_option("--set", overrides, "Config override section.key=value (repeatable)");
  train->add_flag("--scale-schedule", scale_schedule, "Scale the 20/80 epoch thresholds to --epochs");
  train->add_flag("--verbose", verbose, "Print one line per epoch");

  // synth
  auto *synth = app.add_subcommand("synth", "Synthesize from a checkpoint");
  std::string ckpt, score_path, synth_out, synth_corpus, split = "test", dump_dir;
  std::uint64_t synth_seed = 0;
  synth->add_option("--ckpt", ckpt, "Checkpoint")->required()->check(CLI::ExistingFile);
  auto *score_opt = synth->add_option("--score", score_path, "Score file")->check(CLI::ExistingFile);
  auto *corpus_opt = synth->add_option("--corpus", synth_corpus, "Corpus directory: synthesize a whole split");
  score_opt->excludes(corpus_opt);
  synth->add_option("--split", split, "Split used with --corpus")->check(CLI::IsMember({"train", "dev", "test"}));
  synth->add_option("--out", synth_out, "Output wav (with --score) or directory (with --corpus)")->required();
  synth->add_option("--seed", synth_seed, "Seed for the prior sample z");
  synth->add_option("--dump-uncertainty", dump_dir, "With --corpus: write t u_t d_t curves here");

  // eval
  auto *eval = app.add_subcommand("eval", "Objective metrics of hyp wavs against ref wavs");
  std::string ref_dir, hyp_dir, report_path, system = "hyp";
  std::vector<std::string> plot_ids;
  eval->add_option("--ref", ref_dir, "Reference wav directory")->required()->check(CLI::ExistingDirectory);
  eval->add_option("--hyp", hyp_dir, "Hypothesis wav directory")->required()->check(CLI::ExistingDirectory);
  eval->add_option("--report", report_path, "Report path")->required();
  eval->add_option("--wav", plot_ids, "Utterance id to plot (repeatable)");
  eval->add_option("--system", system, "System name in the table");

  // plot
  auto *plot = app.add_subcommand("plot", "Stacked reference/synthesized log-mel plot");
  std::string plot_ref, plot_hyp, plot_out, plot_id;
  plot->add_option("--ref", plot_ref, "Reference wav")->required()->check(CLI::ExistingFile);
  plot->add_option("--hyp", plot_hyp, "Synthesized wav")->required()->check(CLI::ExistingFile);
  plot->add_option("--out", plot_out, "Output PNG")->required();
  plot->add_option("--id", plot_id, "Title (defaults to the hyp file stem)");

  std::vector<const char *> argv;
  for (const auto &a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (gen->parsed()) {
      CorpusOptions opts;
      opts.voice.vibrato = vibrato;
      const CorpusManifest m = GenerateCorpus(num_utts, sample_rate, gen_seed, gen_out, opts);
      WriteRunJson(gen_out, args, "gen-corpus",
                   {{"num_utts", num_utts}, {"sample_rate", sample_rate}, {"vibrato", vibrato}}, gen_seed);
      std::cout << "wrote " << m.entries.size() << " utterances to " << gen_out << "\n";
    } else if (train->parsed()) {
      json cj = ToJson(config_path.empty() ? Config{} : LoadConfig(config_path));
      for (const auto &o : overrides) ApplyOverride(&cj, o);
      if (epochs) cj["train"]["epochs"] = *epochs;
      if (train_seed) cj["train"]["seed"] = *train_seed;
      if (scale_schedule) cj["schedule"]["scale_schedule"] = true;
      const Config cfg = ConfigFromJson(cj);
      const CorpusManifest corpus = LoadManifest(fs::path(corpus_dir) / "manifest.jsonl");
      if (corpus.sample_rate != cfg.model.sample_rate)
        throw std::invalid_argument("corpus sample rate " + std::to_string(corpus.sample_rate) +
                                    " does not match model sample_rate " + std::to_string(cfg.model.sample_rate));
      const TrainingStrategy strategy = MakeStrategy(strategy_name, cfg.schedule, cfg.train.epochs);
      fs::create_directories(train_out);
      WriteRunJson(train_out, args, "train", ToJson(cfg), cfg.train.seed);
      std::ofstream(fs::path(train_out) / "config.json") << ToJson(cfg).dump(2) << '\n';
      RunOptions opts;
      opts.out_dir = train_out;
      opts.verbose = verbose;
      if (!resume.empty()) opts.resume = resume;
      const RunResult r = RunStrategy(strategy, corpus, cfg, opts);
      std::cout << "final checkpoint " << r.final_checkpoint.string() << "\n";
    } else if (synth->parsed()) {
      Config cfg;
      Synthesizer model = LoadSynthesizer(ckpt, &cfg);
      if (!synth_corpus.empty()) {
        const CorpusManifest corpus = LoadManifest(fs::path(synth_corpus) / "manifest.jsonl");
        const auto files = SynthesizeSplit(model, corpus, split, synth_out, synth_seed);
        if (!dump_dir.empty()) {
          const auto examples = LoadExamples(corpus, split, cfg.model);
          const long seg = static_cast<long>(std::floor(cfg.train.segment_seconds * cfg.model.FrameRate()));
          DumpUncertainty(EvaluateUncertainty(model, examples, seg, cfg.uncertainty.grid_length, synth_seed),
                          dump_dir);
        }
        WriteRunJson(synth_out, args, "synth", ToJson(cfg), synth_seed);
        std::cout << "wrote " << files.size() << " files to " << synth_out << "\n";
      } else {
        if (score_path.empty()) throw CLI::RequiredError("--score or --corpus");
        const MusicScore score = LoadScoreFile(score_path);
        WriteWav(synth_out, model->Synthesize(score, synth_seed), cfg.model.sample_rate);
        WriteRunJson(DirOf(synth_out), args, "synth", ToJson(cfg), synth_seed);
      }
    } else if (eval->parsed()) {
      MetricReport r = EvaluateCorpus(ref_dir, hyp_dir);
      r.system = system;
      std::vector<PlotPair> plots;
      for (const auto &id : plot_ids)
        plots.push_back({fs::path(ref_dir) / (id + ".wav"), fs::path(hyp_dir) / (id + ".wav")});
      RenderReport(std::span(&r, 1), report_path, plots);
      for (const auto &w : r.warnings) std::cerr << "warning: " << w << "\n";
      std::cout << FormatReportTable(std::span(&r, 1));
      WriteRunJson(DirOf(report_path), args, "eval", {{"ref", ref_dir}, {"hyp", hyp_dir}, {"wav", plot_ids}}, 0);
    } else if (plot->parsed()) {
      RenderComparisonPlot(plot_ref, plot_hyp, plot_id.empty() ? fs::path(plot_hyp).stem().string() : plot_id,
                           plot_out);
      WriteRunJson(DirOf(plot_out), args, "plot", {{"ref", plot_ref}, {"hyp", plot_hyp}}, 0);
    }
  } catch (const CLI::Error &e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

int Dispatch(int argc, char **argv) { return Dispatch(std::vector<std::string>(argv, argv + argc)); }

}  // namespace usvs
