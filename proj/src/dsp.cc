// src/dsp.cc

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

#include "usvs/dsp.h"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <string>

#include <fftw3.h>

namespace usvs::dsp {

namespace {

// The FFTW planner is not re-entrant.
std::mutex &PlannerMutex() {
  static std::mutex m;
  return m;
}

class RealFft {
 public:
  explicit RealFft(int n) : n_(n) {
    in_ = fftw_alloc_real(n);
    out_ = fftw_alloc_complex(n / 2 + 1);
    std::lock_guard<std::mutex> lock(PlannerMutex());
    plan_ = fftw_plan_dft_r2c_1d(n, in_, out_, FFTW_ESTIMATE);
  }
  ~RealFft() {
    std::lock_guard<std::mutex> lock(PlannerMutex());
    fftw_destroy_plan(plan_);
    fftw_free(in_);
    fftw_free(out_);
  }
  RealFft(const RealFft &) = delete;
  RealFft &operator=(const RealFft &) = delete;

  double *input() { return in_; }
  void Execute() { fftw_execute(plan_); }
  double Magnitude(int k) const { return std::hypot(out_[k][0], out_[k][1]); }

 private:
  int n_;
  double *in_;
  fftw_complex *out_;
  fftw_plan plan_;
};

class Dct2 {
 public:
  explicit Dct2(int n) : n_(n) {
    in_ = fftw_alloc_real(n);
    out_ = fftw_alloc_real(n);
    std::lock_guard<std::mutex> lock(PlannerMutex());
    plan_ = fftw_plan_r2r_1d(n, in_, out_, FFTW_REDFT10, FFTW_ESTIMATE);
  }
  ~Dct2() {
    std::lock_guard<std::mutex> lock(PlannerMutex());
    fftw_destroy_plan(plan_);
    fftw_free(in_);
    fftw_free(out_);
  }
  Dct2(const Dct2 &) = delete;
  Dct2 &operator=(const Dct2 &) = delete;

  double *input() { return in_; }
  // FFTW's REDFT10 is 2 * sum x_n cos(pi k (2n+1) / 2N); rescale to orthonormal.
  double Orthonormal(int k) const {
    double s = k == 0 ? std::sqrt(1.0 / n_) : std::sqrt(2.0 / n_);
    return 0.5 * s * out_[k];
  }
  void Execute() { fftw_execute(plan_); }

 private:
  int n_;
  double *in_;
  double *out_;
  fftw_plan plan_;
};

}  // namespace

std::vector<double> HannWindow(int n_fft, int win_length) {
  if (win_length > n_fft || win_length <= 0)
    throw std::invalid_argument("win_length must be in 1..n_fft");
  std::vector<double> w(n_fft, 0.0);
  const int offset = (n_fft - win_length) / 2;
  for (int n = 0; n < win_length; ++n)
    w[offset + n] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * n / win_length);
  return w;
}

Spectrogram Stft(std::span<const double> waveform, int sample_rate, const StftOptions &opts) {
  if (opts.n_fft <= 0 || opts.hop_length <= 0) throw std::invalid_argument("invalid STFT geometry");
  if (static_cast<long>(waveform.size()) < opts.win_length)
    throw std::invalid_argument("waveform (" + std::to_string(waveform.size()) +
                                " samples) is shorter than the analysis window (" +
                                std::to_string(opts.win_length) + ")");
  const auto window = HannWindow(opts.n_fft, opts.win_length);
  const long n = static_cast<long>(waveform.size());
  const long frames = 1 + n / opts.hop_length;
  const int bins = opts.n_fft / 2 + 1;
  const long pad = opts.n_fft / 2;

  Spectrogram spec;
  spec.magnitudes.resize(frames, bins);
  spec.hop_length = opts.hop_length;
  spec.win_length = opts.win_length;
  spec.n_fft = opts.n_fft;
  spec.sample_rate = sample_rate;

  RealFft fft(opts.n_fft);
  for (long t = 0; t < frames; ++t) {
    const long start = t * opts.hop_length - pad;
    double *in = fft.input();
    for (int i = 0; i < opts.n_fft; ++i) {
      long s = start + i;
      in[i] = (s >= 0 && s < n) ? waveform[s] * window[i] : 0.0;
    }
    fft.Execute();
    for (int k = 0; k < bins; ++k) spec.magnitudes(t, k) = fft.Magnitude(k);
  }
  return spec;
}

double HzToMel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double MelToHz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

Matrix MelFilterbank(int n_fft, int sample_rate, int n_mels, double fmin, double fmax) {
  const int bins = n_fft / 2 + 1;
  if (!(fmin >= 0.0 && fmin < fmax && fmax <= 0.5 * sample_rate + 1e-9))
    throw std::invalid_argument("mel range must satisfy 0 <= fmin < fmax <= sample_rate/2");
  if (n_mels <= 0 || n_mels > bins)
    throw std::invalid_argument("n_mels (" + std::to_string(n_mels) + ") exceeds the " +
                                std::to_string(bins) + " frequency bins");
  const double mlo = HzToMel(fmin), mhi = HzToMel(fmax);
  std::vector<double> edges(n_mels + 2);
  for (int i = 0; i < n_mels + 2; ++i) edges[i] = MelToHz(mlo + (mhi - mlo) * i / (n_mels + 1));

  Matrix fb = Matrix::Zero(n_mels, bins);
  for (int m = 0; m < n_mels; ++m) {
    const double lo = edges[m], centre = edges[m + 1], hi = edges[m + 2];
    for (int k = 0; k < bins; ++k) {
      const double f = static_cast<double>(k) * sample_rate / n_fft;
      const double up = (f - lo) / (centre - lo);
      const double down = (hi - f) / (hi - centre);
      fb(m, k) = std::max(0.0, std::min(up, down));
    }
  }
  return fb;
}

MelSpectrogram ToMelSpectrogram(const Spectrogram &spec, const MelOptions &opts) {
  const double fmax = opts.fmax > 0.0 ? opts.fmax : 0.5 * spec.sample_rate;
  const Matrix fb = MelFilterbank(spec.n_fft, spec.sample_rate, opts.n_mels, opts.fmin, fmax);
  MelSpectrogram mel;
  mel.values = (spec.magnitudes * fb.transpose()).array().unaryExpr([](double x) {
    return std::log(x + kLogMelEpsilon);
  });
  mel.n_mels = opts.n_mels;
  mel.fmin = opts.fmin;
  mel.fmax = fmax;
  mel.hop_length = spec.hop_length;
  mel.sample_rate = spec.sample_rate;
  return mel;
}

MelSpectrogram LogMel(std::span<const double> waveform, int sample_rate, const StftOptions &stft,
                      const MelOptions &mel) {
  return ToMelSpectrogram(Stft(waveform, sample_rate, stft), mel);
}

PitchTrack ExtractF0(std::span<const double> waveform, int sample_rate, const PitchOptions &opts) {
  if (!(opts.fmin > 0.0 && opts.fmin < opts.fmax))
    throw std::invalid_argument("pitch search range must satisfy 0 < fmin < fmax");
  const long n = static_cast<long>(waveform.size());
  const long frames = 1 + n / opts.hop_length;
  const int lag_min = std::max(2, static_cast<int>(std::floor(sample_rate / opts.fmax)));
  const int lag_max = static_cast<int>(std::ceil(sample_rate / opts.fmin));
  const int width = std::max(lag_min * 2, static_cast<int>(std::lround(opts.window_seconds * sample_rate)));

  PitchTrack track;
  track.hop_length = opts.hop_length;
  track.f0.assign(frames, 0.0);
  track.voiced.assign(frames, false);
  track.periodicity.assign(frames, 0.0);

  auto sample = [&](long i) { return (i >= 0 && i < n) ? waveform[i] : 0.0; };
  std::vector<double> r(lag_max + 2, 0.0), trial(lag_max + 2, 0.0);

  for (long t = 0; t < frames; ++t) {
    const long c = t * opts.hop_length;
    double energy = 0.0;
    for (long i = c - width / 2; i < c - width / 2 + width; ++i) energy += sample(i) * sample(i);
    const double rms = std::sqrt(energy / width);
    if (rms < opts.rms_threshold) continue;

    // Correlate two windows placed centred, ahead of and behind the frame
    // centre and keep the most periodic placement, so that frames next to a
    // note change are analysed on one side of it.
    double best = -1.0;
    for (int placement = 0; placement < 3; ++placement) {
      double placement_best = -1.0;
      for (int lag = lag_min - 1; lag <= lag_max + 1; ++lag) {
        const long start = placement == 0   ? c - (width + lag) / 2
                           : placement == 1 ? c
                                            : c - width - lag;
        double ab = 0.0, aa = 0.0, bb = 0.0;
        for (int i = 0; i < width; ++i) {
          const double a = sample(start + i), b = sample(start + lag + i);
          ab += a * b;
          aa += a * a;
          bb += b * b;
        }
        trial[lag] = (aa > 0.0 && bb > 0.0) ? ab / std::sqrt(aa * bb) : 0.0;
        if (lag >= lag_min && lag <= lag_max) placement_best = std::max(placement_best, trial[lag]);
      }
      if (placement_best > best) {
        best = placement_best;
        r.swap(trial);
      }
    }
    if (best <= 0.0) continue;

    // Shortest lag whose local peak is close to the global maximum; this
    // avoids sub-harmonic (octave-down) picks.
    int chosen = -1;
    for (int lag = lag_min; lag <= lag_max; ++lag) {
      if (r[lag] >= 0.9 * best && r[lag] >= r[lag - 1] && r[lag] >= r[lag + 1]) {
        chosen = lag;
        break;
      }
    }
    if (chosen < 0) continue;
    const double periodicity = r[chosen];
    track.periodicity[t] = periodicity;
    if (periodicity < opts.voicing_threshold) continue;

    double offset = 0.0;
    const double denom = r[chosen - 1] - 2.0 * r[chosen] + r[chosen + 1];
    if (denom < 0.0) offset = std::clamp(0.5 * (r[chosen - 1] - r[chosen + 1]) / denom, -0.5, 0.5);
    const double f0 = sample_rate / (chosen + offset);
    track.f0[t] = std::clamp(f0, opts.fmin, opts.fmax);
    track.voiced[t] = true;
  }
  return track;
}

McepSequence ExtractMcep(const MelSpectrogram &mel, int order) {
  if (order < 0 || order >= mel.n_mels)
    throw std::invalid_argument("cepstral order " + std::to_string(order) +
                                " must be below n_mels (" + std::to_string(mel.n_mels) + ")");
  McepSequence out;
  out.order = order;
  out.coefficients.resize(mel.frames(), order + 1);
  Dct2 dct(mel.n_mels);
  for (Eigen::Index t = 0; t < mel.frames(); ++t) {
    for (int i = 0; i < mel.n_mels; ++i) dct.input()[i] = mel.values(t, i);
    dct.Execute();
    for (int k = 0; k <= order; ++k) out.coefficients(t, k) = dct.Orthonormal(k);
  }
  return out;
}

}  // namespace usvs::dsp
