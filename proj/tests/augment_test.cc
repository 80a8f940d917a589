// tests/augment_test.cc

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

#include <random>
#include <set>

#include "grad_check.h"
#include "usvs/augment.h"
#include "usvs/discriminators.h"

using namespace usvs;
using usvs::testing::AnalyticVjp;
using usvs::testing::NumericVjp;
using usvs::testing::RelError;

namespace {

at::Generator Gen(std::uint64_t seed) { return at::detail::createCPUGenerator(seed); }

FeatureMap TimeMap(long channels, long frames, std::uint64_t seed) {
  auto g = Gen(seed);
  return {torch::randn({2, channels, frames}, g, torch::kFloat64), DiscriminatorKind::kMsd, 2, -1};
}

FeatureMap SpecMap(long channels, long freq, long frames, std::uint64_t seed) {
  auto g = Gen(seed);
  return {torch::randn({1, channels, freq, frames}, g, torch::kFloat64), DiscriminatorKind::kMrsd, 3, 2};
}

}  // namespace

TEST_CASE("sample_interval worked examples") {
  auto g = Gen(3);
  MaskSpec a = SampleInterval(100, 0.1, g);
  CHECK(a.length == 10);
  CHECK(a.start >= 0);
  CHECK(a.start <= 90);

  std::set<long> starts;
  for (int i = 0; i < 2000; ++i) {
    MaskSpec b = SampleInterval(10, 0.25, g);
    REQUIRE(b.length == 2);
    REQUIRE(b.start >= 0);
    REQUIRE(b.start <= 8);
    starts.insert(b.start);
  }
  CHECK(starts.size() == 9);

  MaskSpec c = SampleInterval(5, 0.1, g);
  CHECK(c.empty());

  CHECK_THROWS_AS(SampleInterval(0, 0.1, g), std::invalid_argument);
  CHECK_THROWS_AS(SampleInterval(10, 0.0, g), std::invalid_argument);
  CHECK_THROWS_AS(SampleInterval(10, 1.0, g), std::invalid_argument);
}

TEST_CASE("sample_interval is reproducible from the generator") {
  auto g1 = Gen(11), g2 = Gen(11);
  for (int i = 0; i < 50; ++i) CHECK(SampleInterval(300, 0.3, g1) == SampleInterval(300, 0.3, g2));
}

TEST_CASE("mask exactness over random extents and ratios") {
  auto g = Gen(2024);
  std::mt19937_64 rng(99);
  int failures = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const long extent = std::uniform_int_distribution<long>(2, 512)(rng);
    double r = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    if (r == 0.0) r = 0.5;
    const double v = std::uniform_real_distribution<double>(-2.0, 2.0)(rng);
    MaskSpec spec = SampleInterval(extent, r, g);
    const long expect_len = static_cast<long>(std::floor(extent * r));
    torch::Tensor x = torch::randn({3, extent}, g, torch::kFloat64);
    torch::Tensor y = ApplyMask(x, 1, spec, v);
    bool ok = spec.length == expect_len;
    auto px = x.accessor<double, 2>();
    auto py = y.accessor<double, 2>();
    for (long c = 0; c < 3 && ok; ++c)
      for (long t = 0; t < extent && ok; ++t) {
        const bool inside = t >= spec.start && t < spec.start + spec.length;
        ok = inside ? py[c][t] == px[c][t] * v : py[c][t] == px[c][t];
      }
    failures += ok ? 0 : 1;
  }
  CHECK(failures == 0);
}

TEST_CASE("vector-Jacobian products match central differences") {
  auto g = Gen(5);
  FeatureMap tf = TimeMap(8, 32, 1);
  FeatureMap sf = SpecMap(8, 12, 32, 2);
  const MaskSpec tspec{MaskAxis::kTime, 7, 9};
  const MaskSpec fspec{MaskAxis::kFrequency, 3, 4};

  SUBCASE("mask_temporal") {
    auto f = [&](const torch::Tensor &x) { return MaskTemporal({x, tf.kind, 2, -1}, tspec, 0.3).values; };
    torch::Tensor w = torch::randn(tf.values.sizes(), g, torch::kFloat64);
    CHECK(RelError(AnalyticVjp(f, tf.values, w), NumericVjp(f, tf.values, w, 1e-6)) <= 1e-6);
  }
  SUBCASE("mask_frequency") {
    auto f = [&](const torch::Tensor &x) { return MaskFrequency({x, sf.kind, 3, 2}, fspec, 0.0).values; };
    torch::Tensor w = torch::randn(sf.values.sizes(), g, torch::kFloat64);
    CHECK(RelError(AnalyticVjp(f, sf.values, w), NumericVjp(f, sf.values, w, 1e-6)) <= 1e-6);
  }
  SUBCASE("add_interval_noise") {
    // Fresh generator per call so every evaluation sees the same noise.
    auto f = [&](const torch::Tensor &x) {
      auto ng = Gen(77);
      return AddIntervalNoise({x, tf.kind, 2, -1}, tspec, 0.5, ng).values;
    };
    torch::Tensor w = torch::randn(tf.values.sizes(), g, torch::kFloat64);
    CHECK(RelError(AnalyticVjp(f, tf.values, w), NumericVjp(f, tf.values, w, 1e-6)) <= 1e-6);
  }
}

TEST_CASE("degenerate augmentation is the identity") {
  auto g = Gen(8);
  FeatureMap tf = TimeMap(4, 40, 3);
  FeatureMap sf = SpecMap(4, 10, 40, 4);
  CHECK(torch::equal(MaskTemporal(tf, {MaskAxis::kTime, 5, 10}, 1.0).values, tf.values));
  CHECK(torch::equal(MaskFrequency(sf, {MaskAxis::kFrequency, 2, 3}, 1.0).values, sf.values));
  CHECK(torch::equal(AddIntervalNoise(tf, {MaskAxis::kTime, 5, 10}, 0.0, g).values, tf.values));
  CHECK(torch::equal(MaskTemporal(tf, {}, 0.0).values, tf.values));
  CHECK(torch::equal(AddIntervalNoise(tf, {}, 1.0, g).values, tf.values));
}

TEST_CASE("interval noise statistics") {
  auto g = Gen(10);
  FeatureMap f = TimeMap(64, 400, 5);
  const MaskSpec spec{MaskAxis::kTime, 100, 200};
  const double alpha = 0.25;
  torch::Tensor y = AddIntervalNoise(f, spec, alpha, g).values;
  torch::Tensor diff = (y - f.values).narrow(2, 100, 200);
  const double var = diff.var().item<double>();
  CHECK(var == doctest::Approx(alpha * alpha).epsilon(0.05));
  CHECK(torch::equal(y.narrow(2, 0, 100), f.values.narrow(2, 0, 100)));
  CHECK(torch::equal(y.narrow(2, 300, 100), f.values.narrow(2, 300, 100)));
}

TEST_CASE("mask and noise compose in order") {
  FeatureMap f = TimeMap(4, 50, 6);
  AugmentConfig cfg;
  cfg.mode = AugmentMode::kMaskNoise;
  cfg.mask_value = 0.0;
  cfg.noise_scale = 0.2;
  AugmentPlan plan{{MaskAxis::kTime, 10, 5}, {MaskAxis::kTime, 12, 5}};
  auto g1 = Gen(4), g2 = Gen(4);
  torch::Tensor got = ApplyAugmentPlan(f, plan, cfg, g1).values;
  torch::Tensor want = AddIntervalNoise(MaskTemporal(f, plan.mask, 0.0), plan.noise, 0.2, g2).values;
  CHECK(torch::equal(got, want));
  // Frames 10..11 are masked only, 15..16 noised only, 12..14 are pure noise.
  CHECK(got.narrow(2, 10, 2).abs().max().item<double>() == 0.0);
  CHECK(got.narrow(2, 12, 3).abs().min().item<double>() > 0.0);
}

TEST_CASE("routing by discriminator kind") {
  auto g = Gen(12);
  AugmentConfig cfg;
  cfg.mode = AugmentMode::kMask;
  cfg.ratio = 0.25;
  FeatureMap sf = SpecMap(2, 16, 40, 7);
  FeatureMap tf = TimeMap(2, 40, 8);
  std::vector<AugmentPlan> plans;
  AugmentFeatures({sf, tf}, cfg, g, &plans);
  REQUIRE(plans.size() == 2);
  CHECK(plans[0].mask.axis == MaskAxis::kFrequency);
  CHECK(plans[0].mask.length == 4);
  CHECK(plans[1].mask.axis == MaskAxis::kTime);
  CHECK(plans[1].mask.length == 10);
  CHECK(plans[0].noise.empty());

  // Stored plans are reused verbatim.
  auto out = AugmentFeatures({sf, tf}, cfg, g, &plans);
  CHECK(torch::equal(out[1].values, MaskTemporal(tf, plans[1].mask, 0.0).values));

  CHECK_THROWS_AS(MaskFrequency(tf, {MaskAxis::kFrequency, 0, 1}, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(MaskTemporal(tf, {MaskAxis::kTime, 35, 10}, 0.0), std::invalid_argument);
}

TEST_CASE("discriminator shapes and degenerate augmentation path") {
  torch::manual_seed(0);
  ModelConfig mc;
  DiscriminatorBundle d(mc);
  auto g = Gen(1);
  const long n = 4000;
  torch::Tensor wave = 0.1 * torch::randn({2, n}, g, torch::kFloat32);
  auto plain = d->Discriminate(wave, nullptr, nullptr, nullptr);
  REQUIRE(plain.size() == 9);
  // MSD at scale 1: T_f = ceil(T / 16).
  CHECK(plain[6].features.kind == DiscriminatorKind::kMsd);
  CHECK(plain[6].features.TimeExtent() == (n + 15) / 16);
  CHECK(plain[0].features.has_frequency());

  AugmentConfig mask1;
  mask1.mode = AugmentMode::kMaskNoise;
  mask1.mask_value = 1.0;
  mask1.noise_scale = 0.0;
  auto aug = d->Discriminate(wave, &mask1, &g, nullptr);
  for (std::size_t i = 0; i < plain.size(); ++i) CHECK(torch::equal(plain[i].score, aug[i].score));
}
