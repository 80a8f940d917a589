// tests/dsp_test.cc

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
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "usvs/corpus.h"
#include "usvs/dsp.h"
#include "usvs/eval.h"

using namespace usvs;
using namespace usvs::dsp;

namespace {

std::vector<double> Sine(double hz, double seconds, int sr, double amp = 0.5) {
  std::vector<double> x(static_cast<std::size_t>(seconds * sr));
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = amp * std::sin(2.0 * std::numbers::pi * hz * i / sr);
  return x;
}

std::vector<double> Noise(std::size_t n, unsigned seed, double scale = 0.3) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> g(0.0, scale);
  std::vector<double> x(n);
  for (double &v : x) v = g(rng);
  return x;
}

double Median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v[v.size() / 2];
}

}  // namespace

TEST_CASE("stft geometry and zero input") {
  std::vector<double> zeros(5000, 0.0);
  Spectrogram s = Stft(zeros, 16000);
  CHECK(s.frames() == 1 + 5000 / 256);
  CHECK(s.bins() == 513);
  CHECK(s.magnitudes.maxCoeff() == 0.0);
  CHECK_THROWS_AS(Stft(std::vector<double>(1000, 0.0), 16000), std::invalid_argument);
}

TEST_CASE("bin-centred sine peaks at its bin") {
  const int sr = 16000, n_fft = 1024;
  for (int k : {10, 37, 200}) {
    auto x = Sine(static_cast<double>(k) * sr / n_fft, 1.0, sr);
    Spectrogram s = Stft(x, sr);
    for (Eigen::Index t = 0; t < s.frames(); ++t) {
      Eigen::Index arg;
      s.magnitudes.row(t).maxCoeff(&arg);
      CHECK(arg == k);
    }
  }
}

TEST_CASE("Parseval on an un-padded frame") {
  const int sr = 16000;
  auto x = Noise(8000, 11);
  StftOptions opts;
  Spectrogram s = Stft(x, sr, opts);
  const auto w = HannWindow(opts.n_fft, opts.win_length);
  const long t = 10;  // frame fully inside the signal
  const long start = t * opts.hop_length - opts.n_fft / 2;
  REQUIRE(start >= 0);
  double time_energy = 0.0;
  for (int i = 0; i < opts.n_fft; ++i) time_energy += std::pow(w[i] * x[start + i], 2);
  double freq_energy = 0.0;
  const int half = opts.n_fft / 2;
  for (int k = 0; k <= half; ++k) {
    const double p = s.magnitudes(t, k) * s.magnitudes(t, k);
    freq_energy += (k == 0 || k == half) ? p : 2.0 * p;
  }
  CHECK(freq_energy / opts.n_fft == doctest::Approx(time_energy).epsilon(1e-6));
}

TEST_CASE("mel filterbank") {
  const int sr = 16000, n_fft = 1024;
  Matrix fb = MelFilterbank(n_fft, sr, 80, 0.0, 8000.0);
  CHECK(fb.rows() == 80);
  CHECK(fb.cols() == 513);
  for (Eigen::Index m = 0; m < fb.rows(); ++m) CHECK(fb.row(m).sum() > 0.0);
  // Every bin strictly between fmin and fmax is covered.
  for (Eigen::Index k = 1; k < 512; ++k) CHECK(fb.col(k).sum() > 0.0);
  CHECK(fb.minCoeff() >= 0.0);

  CHECK_THROWS_AS(MelFilterbank(n_fft, sr, 600, 0.0, 8000.0), std::invalid_argument);
  CHECK_THROWS_AS(MelFilterbank(n_fft, sr, 80, 4000.0, 4000.0), std::invalid_argument);
  CHECK_THROWS_AS(MelFilterbank(n_fft, sr, 80, 0.0, 9000.0), std::invalid_argument);

  SUBCASE("partial band") {
    Matrix part = MelFilterbank(n_fft, sr, 40, 300.0, 4000.0);
    for (Eigen::Index k = 0; k < 513; ++k) {
      const double f = k * 16000.0 / 1024;
      if (f > 300.0 && f < 4000.0) CHECK(part.col(k).sum() > 0.0);
      if (f <= 300.0 || f >= 4000.0) CHECK(part.col(k).sum() < 1e-12);
    }
  }
}

TEST_CASE("log-mel of zeros and of scaled magnitudes") {
  Spectrogram zeros;
  zeros.magnitudes = Matrix::Zero(7, 513);
  zeros.n_fft = 1024;
  zeros.hop_length = 256;
  zeros.win_length = 1024;
  zeros.sample_rate = 16000;
  MelSpectrogram m0 = ToMelSpectrogram(zeros);
  CHECK(m0.frames() == 7);
  for (Eigen::Index t = 0; t < 7; ++t)
    for (int k = 0; k < 80; ++k) CHECK(m0.values(t, k) == std::log(kLogMelEpsilon));

  Spectrogram s = Stft(Noise(16000, 3), 16000);
  Spectrogram s2 = s;
  s2.magnitudes *= 2.0;
  MelSpectrogram a = ToMelSpectrogram(s), b = ToMelSpectrogram(s2);
  int checked = 0;
  for (Eigen::Index t = 0; t < a.frames(); ++t)
    for (int k = 0; k < 80; ++k)
      if (a.values(t, k) > std::log(1e3 * kLogMelEpsilon)) {
        CHECK(b.values(t, k) - a.values(t, k) == doctest::Approx(std::log(2.0)).epsilon(1e-3));
        ++checked;
      }
  CHECK(checked > 1000);
}

TEST_CASE("pitch tracker") {
  const int sr = 16000;
  SUBCASE("440 Hz sine") {
    PitchTrack p = ExtractF0(Sine(440.0, 1.0, sr), sr);
    CHECK(p.frames() == 1 + 16000 / 256);
    std::vector<double> voiced;
    for (std::size_t t = 0; t < p.frames(); ++t) {
      CHECK(p.voiced[t] == (p.f0[t] > 0));
      if (p.voiced[t]) voiced.push_back(p.f0[t]);
    }
    REQUIRE(voiced.size() > 50);
    CHECK(std::abs(Median(voiced) - 440.0) <= 2.0);
  }
  SUBCASE("white noise is mostly unvoiced") {
    PitchTrack p = ExtractF0(Noise(sr * 2, 5), sr);
    const auto unvoiced = std::count(p.voiced.begin(), p.voiced.end(), false);
    CHECK(static_cast<double>(unvoiced) >= 0.9 * p.frames());
  }
  SUBCASE("silence") {
    PitchTrack p = ExtractF0(std::vector<double>(sr, 0.0), sr);
    CHECK(std::count(p.voiced.begin(), p.voiced.end(), true) == 0);
    CHECK(std::all_of(p.f0.begin(), p.f0.end(), [](double f) { return f == 0.0; }));
  }
  SUBCASE("range in voiced frames") {
    PitchTrack p = ExtractF0(Sine(200.0, 0.5, sr), sr, PitchOptions{.fmin = 100, .fmax = 400});
    for (std::size_t t = 0; t < p.frames(); ++t)
      if (p.voiced[t]) {
        CHECK(p.f0[t] >= 100.0);
        CHECK(p.f0[t] <= 400.0);
      }
    CHECK_THROWS_AS(ExtractF0(Sine(200.0, 0.5, sr), sr, PitchOptions{.fmin = 300, .fmax = 200}),
                    std::invalid_argument);
  }
  SUBCASE("toy voice tracks its analytic f0") {
    for (std::uint64_t seed = 100; seed < 106; ++seed) {
      Utterance u = SynthesizeToyVoice(RandomScore(seed, sr, CorpusOptions{}), sr, seed);
      PitchTrack ref{u.f0_ref, u.vuv_ref, {}, 256};
      PitchTrack hyp = ExtractF0(u.waveform, sr);
      REQUIRE(hyp.frames() == ref.frames());
      auto rmse = LogF0Rmse(ref, hyp);
      REQUIRE(rmse.has_value());
      CHECK(*rmse <= 0.05);
    }
  }
}

TEST_CASE("mel cepstrum") {
  MelSpectrogram mel;
  mel.n_mels = 20;
  mel.values = Matrix::Constant(3, 20, -2.5);
  McepSequence c = ExtractMcep(mel, 13);
  CHECK(c.frames() == 3);
  CHECK(c.coefficients.cols() == 14);
  for (Eigen::Index t = 0; t < 3; ++t) {
    CHECK(c.coefficients(t, 0) == doctest::Approx(-2.5 * std::sqrt(20.0)));
    for (int k = 1; k <= 13; ++k) CHECK(std::abs(c.coefficients(t, k)) < 1e-12);
  }
  CHECK_THROWS_AS(ExtractMcep(mel, 20), std::invalid_argument);

  SUBCASE("matches a direct orthonormal DCT-II summation") {
    MelSpectrogram m = LogMel(Noise(8000, 9), 16000);
    McepSequence fast = ExtractMcep(m, 13);
    McepSequence again = ExtractMcep(m, 13);
    CHECK(fast.coefficients == again.coefficients);
    const int n = m.n_mels;
    for (Eigen::Index t = 0; t < m.frames(); ++t)
      for (int k = 0; k <= 13; ++k) {
        long double acc = 0.0L;
        for (int i = 0; i < n; ++i)
          acc += m.values(t, i) * std::cos(std::numbers::pi_v<long double> * k * (2 * i + 1) / (2.0L * n));
        const long double scale = k == 0 ? std::sqrt(1.0L / n) : std::sqrt(2.0L / n);
        CHECK(std::abs(static_cast<double>(scale * acc) - fast.coefficients(t, k)) < 1e-9);
      }
  }
}

TEST_CASE("frame counts agree across the feature chain") {
  for (std::size_t n : {1024u, 4000u, 16000u, 16001u}) {
    auto x = Noise(n, 1);
    Spectrogram s = Stft(x, 16000);
    MelSpectrogram m = ToMelSpectrogram(s);
    McepSequence c = ExtractMcep(m);
    PitchTrack p = ExtractF0(x, 16000);
    CHECK(m.frames() == s.frames());
    CHECK(c.frames() == s.frames());
    CHECK(static_cast<Eigen::Index>(p.frames()) == s.frames());
  }
}
