// tests/cli_test.cc

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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#undef CHECK  // c10 logging defines its own
#include "doctest.h"

#include <cmath>

#include "json.hpp"
#include "test_util.h"
#include "usvs/cli.h"
#include "usvs/corpus.h"
#include "usvs/wav_io.h"

using namespace usvs;
using usvs::testing::ReadFile;
using usvs::testing::TempDir;

namespace {

int Run(std::vector<std::string> args) {
  args.insert(args.begin(), "usvs");
  return Dispatch(args);
}

std::vector<std::string> TinyModel() {
  return {"--set", "model.latent_dim=8",       "--set", "model.posterior_channels=16",
          "--set", "model.prior_hidden=16",    "--set", "model.ffn_channels=16",
          "--set", "model.decoder_channels=16", "--set", "model.disc_channels=8",
          "--set", "model.mrsd_fft_sizes=[256]", "--set", "model.mpd_periods=[2]",
          "--set", "model.msd_scales=[1]",     "--set", "train.segment_seconds=0.25"};
}

}  // namespace

TEST_CASE("usage errors exit 1") {
  CHECK(Run({}) == 1);
  CHECK(Run({"frobnicate"}) == 1);
  CHECK(Run({"train", "--corpus", "x", "--strategy", "B&X", "--out", "y"}) == 1);
  CHECK(Run({"gen-corpus"}) == 1);
  CHECK(Run({"--help"}) == 0);
}

TEST_CASE("end to end through the command line") {
  TempDir dir("usvs_cli");
  const std::string corpus = (dir / "corpus").string();
  REQUIRE(Run({"gen-corpus", "--out", corpus, "--num-utts", "50", "--seed", "7"}) == 0);
  CorpusManifest m = LoadManifest(dir / "corpus" / "manifest.jsonl");
  CHECK(m.entries.size() == 50);
  auto run = nlohmann::json::parse(ReadFile(dir / "corpus" / "run.json"));
  CHECK(run["subcommand"] == "gen-corpus");
  CHECK(run["seed"] == 7);
  CHECK(run.contains("version"));

  // Self-comparison report.
  const std::string wavs = (dir / "corpus" / "wavs").string();
  REQUIRE(Run({"eval", "--ref", wavs, "--hyp", wavs, "--report", (dir / "self.txt").string(), "--wav",
               "utt0000"}) == 0);
  const std::string report = ReadFile(dir / "self.txt");
  CHECK(report.find("0.000") != std::string::npos);
  CHECK(report.find("100.00%") != std::string::npos);
  CHECK(report.find("0.00%") != std::string::npos);
  CHECK(Run({"eval", "--ref", wavs, "--hyp", (dir / "nope").string(), "--report", "r.txt"}) == 1);

  // Runtime failure exits 2.
  CHECK(Run({"train", "--corpus", (dir / "missing").string(), "--strategy", "B", "--out",
             (dir / "r").string()}) == 2);

  std::vector<std::string> train = {"train", "--corpus", corpus, "--strategy", "b", "--epochs", "1",
                                    "--out", (dir / "run").string(), "--seed", "3"};
  for (const auto &a : TinyModel()) train.push_back(a);
  REQUIRE(Run(train) == 0);
  const auto ckpt = dir / "run" / "ckpt_epoch000.bin";
  REQUIRE(std::filesystem::exists(ckpt));
  auto cfg = nlohmann::json::parse(ReadFile(dir / "run" / "config.json"));
  CHECK(cfg["model"]["latent_dim"] == 8);
  CHECK(cfg["train"]["seed"] == 3);
  CHECK(std::filesystem::exists(dir / "run" / "train_log.jsonl"));

  // Same checkpoint, score and seed give identical audio; a new seed changes it.
  const std::string score = (dir / "corpus" / "scores" / "utt0000.txt").string();
  auto synth = [&](const std::string &out, const std::string &seed) {
    return Run({"synth", "--ckpt", ckpt.string(), "--score", score, "--out", out, "--seed", seed});
  };
  REQUIRE(synth((dir / "a.wav").string(), "1") == 0);
  REQUIRE(synth((dir / "b.wav").string(), "1") == 0);
  REQUIRE(synth((dir / "c.wav").string(), "2") == 0);
  CHECK(ReadFile(dir / "a.wav") == ReadFile(dir / "b.wav"));
  CHECK(ReadFile(dir / "a.wav") != ReadFile(dir / "c.wav"));

  // Output length equals the score duration within one hop.
  const WavData a = ReadWav(dir / "a.wav");
  const double expected = ParseScore(ReadFile(score)).TotalDuration() * a.sample_rate;
  CHECK(std::abs(static_cast<double>(a.samples.size()) - expected) <= 256.0);

  REQUIRE(Run({"synth", "--ckpt", ckpt.string(), "--corpus", corpus, "--split", "test", "--out",
               (dir / "test").string(), "--dump-uncertainty", (dir / "u").string()}) == 0);
  CHECK(std::distance(std::filesystem::directory_iterator(dir / "test"), {}) == 5 + 1);  // wavs + run.json
  CHECK(!std::filesystem::is_empty(dir / "u"));

  REQUIRE(Run({"plot", "--ref", (dir / "corpus" / "wavs" / "utt0000.wav").string(), "--hyp",
               (dir / "a.wav").string(), "--out", (dir / "p.png").string()}) == 0);
  CHECK(ReadFile(dir / "p.png").substr(1, 3) == "PNG");
}
