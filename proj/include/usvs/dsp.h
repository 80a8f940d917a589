// include/usvs/dsp.h

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

#ifndef USVS_DSP_H_
#define USVS_DSP_H_

#include <span>
#include <vector>

#include <Eigen/Dense>

namespace usvs::dsp {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Floor added before the log in log-mel features.
inline constexpr double kLogMelEpsilon = 1e-5;

struct StftOptions {
  int n_fft = 1024;
  int hop_length = 256;
  int win_length = 1024;
};

struct Spectrogram {
  Matrix magnitudes;  // frames x (n_fft/2 + 1)
  int hop_length = 0;
  int win_length = 0;
  int n_fft = 0;
  int sample_rate = 0;

  Eigen::Index frames() const { return magnitudes.rows(); }
  Eigen::Index bins() const { return magnitudes.cols(); }
};

/// Periodic Hann window of win_length, zero-padded (centred) to n_fft.
std::vector<double> HannWindow(int n_fft, int win_length);

/// Centre-padded (zeros) STFT magnitudes; frames = 1 + floor(T / hop).
Spectrogram Stft(std::span<const double> waveform, int sample_rate, const StftOptions &opts = {});

double HzToMel(double hz);
double MelToHz(double mel);

/// Triangular HTK-mel filterbank, n_mels x (n_fft/2 + 1), unnormalized.
Matrix MelFilterbank(int n_fft, int sample_rate, int n_mels, double fmin, double fmax);

struct MelOptions {
  int n_mels = 80;
  double fmin = 0.0;
  double fmax = 0.0;  // 0 means sample_rate / 2
};

struct MelSpectrogram {
  Matrix values;  // frames x n_mels, log(mel + eps)
  int n_mels = 0;
  double fmin = 0.0;
  double fmax = 0.0;
  int hop_length = 0;
  int sample_rate = 0;

  Eigen::Index frames() const { return values.rows(); }
};

MelSpectrogram ToMelSpectrogram(const Spectrogram &spec, const MelOptions &opts = {});

/// Stft followed by ToMelSpectrogram.
MelSpectrogram LogMel(std::span<const double> waveform, int sample_rate,
                      const StftOptions &stft = {}, const MelOptions &mel = {});

struct PitchOptions {
  int hop_length = 256;
  double fmin = 50.0;
  double fmax = 1000.0;
  double voicing_threshold = 0.45;  // minimum normalized autocorrelation
  double rms_threshold = 1e-3;
  double window_seconds = 0.025;    // correlation window
};

struct PitchTrack {
  std::vector<double> f0;  // Hz, 0 when unvoiced
  std::vector<bool> voiced;
  std::vector<double> periodicity;
  int hop_length = 0;

  std::size_t frames() const { return f0.size(); }
};

/// Normalized cross-correlation pitch tracker. Frame t is centred on sample
/// t * hop, giving the same frame count as Stft.
PitchTrack ExtractF0(std::span<const double> waveform, int sample_rate, const PitchOptions &opts = {});

struct McepSequence {
  Matrix coefficients;  // frames x (order + 1)
  int order = 0;

  Eigen::Index frames() const { return coefficients.rows(); }
};

/// Orthonormal DCT-II of every log-mel frame, keeping coefficients 0..order.
McepSequence ExtractMcep(const MelSpectrogram &mel, int order = 13);

}  // namespace usvs::dsp

#endif  // USVS_DSP_H_
