// tests/train_test.cc

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
#include <cstdlib>
#include <fstream>

#include "test_util.h"
#include "usvs/checkpoint.h"
#include "usvs/config.h"
#include "usvs/corpus.h"
#include "usvs/train.h"

using namespace usvs;
using usvs::testing::TempDir;

namespace {

Config TinyConfig() {
  Config c;
  c.model.n_mels = 40;
  c.model.latent_dim = 8;
  c.model.posterior_channels = 16;
  c.model.posterior_layers = 2;
  c.model.prior_hidden = 16;
  c.model.prior_blocks = 1;
  c.model.ffn_channels = 16;
  c.model.decoder_channels = 16;
  c.model.mrsd_fft_sizes = {256};
  c.model.mpd_periods = {2};
  c.model.msd_scales = {1};
  c.model.disc_channels = 8;
  c.uncertainty.channels = 8;
  c.uncertainty.grid_length = 20;
  c.train.batch_size = 2;
  c.train.segment_seconds = 0.25;
  c.train.epochs = 2;
  return c;
}

struct Fixture {
  TempDir dir{"usvs_train"};
  CorpusManifest corpus;
  std::vector<TrainingExample> examples;
  Fixture() {
    corpus = GenerateCorpus(5, 16000, 3, dir / "corpus");
    examples = LoadExamples(corpus, "train", TinyConfig().model);
  }
  Batch MakeFixedBatch(std::uint64_t seed, long frames = 16) {
    auto g = at::detail::createCPUGenerator(seed);
    return MakeBatch({&examples[0], &examples[1]}, frames, g);
  }
};

Fixture &Shared() {
  static Fixture f;
  return f;
}

double Checksum(torch::nn::Module &m) {
  torch::NoGradGuard no_grad;
  double s = 0;
  for (const auto &p : m.parameters()) s += p.to(torch::kFloat64).abs().sum().item<double>();
  return s;
}

std::vector<torch::Tensor> Snapshot(torch::nn::Module &m) {
  std::vector<torch::Tensor> out;
  for (const auto &p : m.parameters()) out.push_back(p.detach().clone());
  return out;
}

bool SameParams(torch::nn::Module &m, const std::vector<torch::Tensor> &snap) {
  auto ps = m.parameters();
  if (ps.size() != snap.size()) return false;
  for (std::size_t i = 0; i < ps.size(); ++i)
    if (!torch::equal(ps[i], snap[i])) return false;
  return true;
}

}  // namespace

TEST_CASE("strategy schedules") {
  ScheduleConfig sc;
  auto flags_over = [](const TrainingStrategy &s, int epochs) {
    std::vector<StageFlags> out;
    for (int e = 0; e < epochs; ++e) out.push_back(s.FlagsAt(e));
    return out;
  };
  for (const auto &f : flags_over(MakeStrategy("B", sc, 200), 200)) CHECK(f == StageFlags{});
  for (const auto &f : flags_over(MakeStrategy("B+D", sc, 10), 10)) CHECK(f == StageFlags{true, false});

  auto bu = flags_over(MakeStrategy("B&U", sc, 25), 25);
  for (int e = 0; e < 25; ++e) CHECK(bu[e].uncertainty_on == (e >= 20));
  for (int e = 0; e < 25; ++e) CHECK_FALSE(bu[e].augment_on);

  auto bud = flags_over(MakeStrategy("B&U&(U+D)", sc, 100), 100);
  for (int e = 0; e < 100; ++e) {
    CHECK(bud[e].uncertainty_on == (e >= 20));
    CHECK(bud[e].augment_on == (e >= 80));
  }

  ScheduleConfig scaled = sc;
  scaled.scale_schedule = true;
  auto s = MakeStrategy("bud", scaled, 50);
  CHECK(s.name == "B&U&(U+D)");
  CHECK_FALSE(s.FlagsAt(4).uncertainty_on);
  CHECK(s.FlagsAt(5).uncertainty_on);
  CHECK_FALSE(s.FlagsAt(19).augment_on);
  CHECK(s.FlagsAt(20).augment_on);

  CHECK(CanonicalStrategyName("bu") == "B&U");
  try {
    CanonicalStrategyName("B&X");
    FAIL("expected an error");
  } catch (const std::invalid_argument &e) {
    const std::string msg = e.what();
    for (const auto &n : StrategyNames()) CHECK(msg.find(n) != std::string::npos);
  }
}

TEST_CASE("learning rate decay") {
  OptimizerConfig oc;
  for (int e = 0; e < 200; ++e) {
    const double want = 2.0e-4 * std::pow(0.998, e);
    CHECK(std::abs(LearningRate(oc, e) - want) <= 1e-12 * want);
  }
}

TEST_CASE("config json") {
  Config c = TinyConfig();
  c.augment.mode = AugmentMode::kMaskNoise;
  c.train.adversarial_form = AdversarialForm::kLiteral;
  nlohmann::json j = ToJson(c);
  CHECK(ToJson(ConfigFromJson(j)) == j);

  nlohmann::json bad = j;
  bad["train"]["epochz"] = 3;
  try {
    ConfigFromJson(bad);
    FAIL("expected an error");
  } catch (const std::invalid_argument &e) {
    CHECK(std::string(e.what()).find("epochz") != std::string::npos);
  }
  bad = j;
  bad["augment"]["ratio"] = "big";
  CHECK_THROWS_AS(ConfigFromJson(bad), std::invalid_argument);
  bad = j;
  bad["augment"]["ratio"] = 1.5;
  CHECK_THROWS_AS(ConfigFromJson(bad), std::invalid_argument);

  ApplyOverride(&j, "train.batch_size=7");
  ApplyOverride(&j, "augment.mode=noise");
  Config o = ConfigFromJson(j);
  CHECK(o.train.batch_size == 7);
  CHECK(o.augment.mode == AugmentMode::kNoise);
  CHECK_THROWS_AS(ApplyOverride(&j, "nonsense"), std::invalid_argument);
}

TEST_CASE("examples and batches") {
  auto &f = Shared();
  REQUIRE(f.examples.size() == 3);  // 5 utterances: 3 / 1 / 1
  for (const auto &ex : f.examples) CHECK(ex.wave.size(0) == ex.frames() * 256);
  Batch b = f.MakeFixedBatch(1, 20);
  CHECK(b.wave.sizes() == torch::IntArrayRef({2, 20 * 256}));
  CHECK(b.phonemes.sizes() == torch::IntArrayRef({2, 20}));
  // Crops keep audio and score aligned: rebuild the crop of example 0 by search.
  const long n = f.examples[0].frames();
  bool found = false;
  for (long s = 0; s + 20 <= n && !found; ++s)
    found = torch::equal(f.examples[0].wave.narrow(0, s * 256, 20 * 256), b.wave[0]) &&
            torch::equal(f.examples[0].phonemes.narrow(0, s, 20), b.phonemes[0]);
  CHECK(found);
}

TEST_CASE("train step determinism and finiteness") {
  auto &f = Shared();
  const Config cfg = TinyConfig();
  Trainer a(cfg, MakeStrategy("B&U", cfg.schedule, 2));
  Trainer b(cfg, MakeStrategy("B&U", cfg.schedule, 2));
  const StageFlags all{true, true};
  for (int i = 0; i < 2; ++i) {
    Batch batch = f.MakeFixedBatch(10 + i);
    LossReport ra = a.TrainStep(batch, all);
    LossReport rb = b.TrainStep(batch, all);
    CHECK(ra == rb);
    for (double v : {ra.discriminator, ra.adversarial, ra.kl, ra.recon, ra.uncertainty, ra.generator_total})
      CHECK(std::isfinite(v));
    CHECK(ra.uncertainty > 0.0);
  }
}

TEST_CASE("lr = 0 leaves parameters unchanged") {
  auto &f = Shared();
  const Config cfg = TinyConfig();
  Trainer t(cfg, MakeStrategy("B", cfg.schedule, 1));
  t.SetLearningRate(0.0);
  auto g0 = Snapshot(*t.generator());
  auto d0 = Snapshot(*t.discriminators());
  t.TrainStep(f.MakeFixedBatch(2), StageFlags{true, true});
  CHECK(SameParams(*t.generator(), g0));
  CHECK(SameParams(*t.discriminators(), d0));
}

TEST_CASE("parameter-group isolation") {
  auto &f = Shared();
  const Config cfg = TinyConfig();
  Trainer t(cfg, MakeStrategy("B", cfg.schedule, 1));
  const double g_before = Checksum(*t.generator());
  const double d_before = Checksum(*t.discriminators());
  double g_mid = 0, d_mid = 0;
  t.feature_hook = [&](TrainPhase phase, const std::vector<DiscriminatorOutput> *,
                       const std::vector<DiscriminatorOutput> &) {
    if (phase != TrainPhase::kGenerator) return;
    g_mid = Checksum(*t.generator());
    d_mid = Checksum(*t.discriminators());
  };
  t.TrainStep(f.MakeFixedBatch(3), StageFlags{false, true});
  // The discriminator update touched only D, the generator update only G.
  CHECK(g_mid == g_before);
  CHECK(d_mid != d_before);
  CHECK(Checksum(*t.discriminators()) == d_mid);
  CHECK(Checksum(*t.generator()) != g_mid);
}

TEST_CASE("v = 0 mask leaves a zeroed interval in the features seen by the heads") {
  auto &f = Shared();
  Config cfg = TinyConfig();
  cfg.augment.mode = AugmentMode::kMask;
  cfg.augment.mask_value = 0.0;
  cfg.augment.ratio = 0.25;
  Trainer t(cfg, MakeStrategy("B+D", cfg.schedule, 1));
  int checked = 0;
  auto zero_slices = [](const FeatureMap &m) {
    const int axis = m.kind == DiscriminatorKind::kMrsd ? m.freq_axis : m.time_axis;
    torch::Tensor v = m.values.detach().abs().movedim(axis, 0).reshape({m.values.size(axis), -1});
    return std::make_pair((v.amax(1) == 0).sum().item<long>(), m.values.size(axis));
  };
  t.feature_hook = [&](TrainPhase, const std::vector<DiscriminatorOutput> *real,
                       const std::vector<DiscriminatorOutput> &fake) {
    std::vector<const std::vector<DiscriminatorOutput> *> sides = {&fake};
    if (real != nullptr) sides.push_back(real);
    for (const auto *side : sides)
      for (const auto &o : *side) {
        auto [zeros, extent] = zero_slices(o.features);
        CHECK(zeros == static_cast<long>(std::floor(extent * 0.25)));
        ++checked;
      }
  };
  t.TrainStep(f.MakeFixedBatch(4, 32), StageFlags{true, false});
  CHECK(checked == 9);  // 3 maps on each of the two D sides plus the G side
}

TEST_CASE("checkpoint round trip") {
  auto &f = Shared();
  TempDir dir("usvs_ckpt");
  const Config cfg = TinyConfig();

  CheckpointData d;
  d.Add("a", torch::randn({3, 4}));
  d.Add("b", torch::arange(5, torch::kInt64));
  d.Add("c", torch::randn({2}, torch::kFloat64));
  d.metadata = {{"x", 1}};
  SaveCheckpoint(dir / "plain.bin", d);
  CheckpointData r = LoadCheckpoint(dir / "plain.bin");
  CHECK(torch::equal(r.Get("a"), d.Get("a")));
  CHECK(torch::equal(r.Get("b"), d.Get("b")));
  CHECK(torch::equal(r.Get("c"), d.Get("c")));
  CHECK(r.metadata == d.metadata);
  CHECK_THROWS_AS(r.Get("zz"), std::runtime_error);
  usvs::testing::WriteFile(dir / "junk.bin", "not a checkpoint");
  CHECK_THROWS_AS(LoadCheckpoint(dir / "junk.bin"), std::runtime_error);

  Trainer a(cfg, MakeStrategy("B&U", cfg.schedule, 2));
  const StageFlags all{true, true};
  a.TrainStep(f.MakeFixedBatch(5), all);
  a.Save(dir / "t.bin");
  auto b = Trainer::FromCheckpoint(dir / "t.bin");
  CHECK(b->step() == a.step());
  CHECK(b->strategy().name == "B&U");
  Batch next = f.MakeFixedBatch(6);
  CHECK(a.TrainStep(next, all) == b->TrainStep(next, all));
  auto pa = a.generator()->parameters(), pb = b->generator()->parameters();
  for (std::size_t i = 0; i < pa.size(); ++i) CHECK(torch::equal(pa[i], pb[i]));
}

TEST_CASE("run_strategy resume reproduces the remaining schedule") {
  auto &f = Shared();
  TempDir dir("usvs_run");
  Config cfg = TinyConfig();
  cfg.train.epochs = 3;
  cfg.schedule.uncertainty_start = 1;
  const auto strategy = MakeStrategy("B&U", cfg.schedule, 3);
  RunOptions full{dir / "full", std::nullopt, false};
  RunResult whole = RunStrategy(strategy, f.corpus, cfg, full);
  REQUIRE(whole.log.size() == 3);
  CHECK_FALSE(whole.log[0].flags.uncertainty_on);
  CHECK(whole.log[1].flags.uncertainty_on);
  CHECK(std::filesystem::exists(dir / "full" / "ckpt_epoch002.bin"));
  CHECK(usvs::testing::ReadFile(whole.log_path).find("\"uncertainty_on\":true") != std::string::npos);

  Config two = cfg;
  two.train.epochs = 2;
  RunStrategy(strategy, f.corpus, two, {dir / "part", std::nullopt, false});
  RunResult resumed = RunStrategy(strategy, f.corpus, cfg, {dir / "part", dir / "part" / "ckpt_epoch001.bin", false});
  REQUIRE(resumed.log.size() == 3);
  CHECK(resumed.log[2].losses == whole.log[2].losses);
  CHECK(resumed.log[2].flags == whole.log[2].flags);

  CHECK_THROWS_AS(RunStrategy(MakeStrategy("B", cfg.schedule, 3), f.corpus, cfg,
                              {dir / "bad", dir / "part" / "ckpt_epoch001.bin", false}),
                  std::runtime_error);

  Config keep = cfg;
  keep.train.keep_checkpoints = 1;
  RunStrategy(strategy, f.corpus, keep, {dir / "keep", std::nullopt, false});
  CHECK_FALSE(std::filesystem::exists(dir / "keep" / "ckpt_epoch001.bin"));
  CHECK(std::filesystem::exists(dir / "keep" / "ckpt_epoch002.bin"));
}

TEST_CASE("non-finite losses are named") {
  auto &f = Shared();
  const Config cfg = TinyConfig();
  Trainer t(cfg, MakeStrategy("B", cfg.schedule, 1));
  Batch b = f.MakeFixedBatch(7);
  b.wave[0][5] = std::numeric_limits<float>::infinity();
  CHECK_THROWS(t.TrainStep(b, StageFlags{}));
}

TEST_CASE("shipped default config matches Config{}") {
  const char *root = std::getenv("USVS_SOURCE_DIR");
  REQUIRE(root != nullptr);
  std::ifstream in(std::filesystem::path(root) / "configs" / "default.json");
  REQUIRE(in.good());
  const nlohmann::json shipped = nlohmann::json::parse(in);
  CHECK(shipped == ToJson(Config{}));
  CHECK(ToJson(ConfigFromJson(shipped)) == shipped);
}
