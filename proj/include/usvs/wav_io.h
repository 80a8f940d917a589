// include/usvs/wav_io.h

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

#ifndef USVS_WAV_IO_H_
#define USVS_WAV_IO_H_

#include <filesystem>
#include <span>
#include <vector>

namespace usvs {

struct WavData {
  int sample_rate = 0;
  std::vector<double> samples;  // mono, [-1, 1]
};

/// RIFF/WAVE, 16-bit signed PCM, mono. Samples are clipped to [-1, 1].
void WriteWav(const std::filesystem::path &path, std::span<const double> samples,
              int sample_rate);

/// Reads 16-bit PCM mono files; multi-channel input is rejected.
WavData ReadWav(const std::filesystem::path &path);

/// Quantizes exactly as WriteWav does, without touching the filesystem.
std::vector<double> QuantizePcm16(std::span<const double> samples);

}  // namespace usvs

#endif  // USVS_WAV_IO_H_
