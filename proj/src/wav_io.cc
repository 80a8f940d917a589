// src/wav_io.cc

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

#include "usvs/wav_io.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace usvs {

namespace {

void PutU32(std::vector<char> *out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out->push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void PutU16(std::vector<char> *out, std::uint16_t v) {
  out->push_back(static_cast<char>(v & 0xff));
  out->push_back(static_cast<char>((v >> 8) & 0xff));
}

std::uint32_t GetU32(const unsigned char *p) {
  return p[0] | (p[1] << 8) | (p[2] << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint16_t GetU16(const unsigned char *p) { return static_cast<std::uint16_t>(p[0] | (p[1] << 8)); }

std::int16_t ToPcm(double x) {
  double c = std::clamp(x, -1.0, 1.0);
  return static_cast<std::int16_t>(std::lround(c * 32767.0));
}

}  // namespace

std::vector<double> QuantizePcm16(std::span<const double> samples) {
  std::vector<double> out(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) out[i] = ToPcm(samples[i]) / 32767.0;
  return out;
}

void WriteWav(const std::filesystem::path &path, std::span<const double> samples,
              int sample_rate) {
  if (sample_rate <= 0) throw std::invalid_argument("WriteWav: sample rate must be positive");
  const std::uint32_t data_bytes = static_cast<std::uint32_t>(samples.size() * 2);
  std::vector<char> buf;
  buf.reserve(44 + data_bytes);
  buf.insert(buf.end(), {'R', 'I', 'F', 'F'});
  PutU32(&buf, 36 + data_bytes);
  buf.insert(buf.end(), {'W', 'A', 'V', 'E', 'f', 'm', 't', ' '});
  PutU32(&buf, 16);
  PutU16(&buf, 1);  // PCM
  PutU16(&buf, 1);  // mono
  PutU32(&buf, static_cast<std::uint32_t>(sample_rate));
  PutU32(&buf, static_cast<std::uint32_t>(sample_rate) * 2);
  PutU16(&buf, 2);
  PutU16(&buf, 16);
  buf.insert(buf.end(), {'d', 'a', 't', 'a'});
  PutU32(&buf, data_bytes);
  for (double x : samples) PutU16(&buf, static_cast<std::uint16_t>(ToPcm(x)));

  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  os.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!os) throw std::runtime_error("failed writing " + path.string());
}

WavData ReadWav(const std::filesystem::path &path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(is)),
                                   std::istreambuf_iterator<char>());
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0)
    throw std::runtime_error(path.string() + ": not a RIFF/WAVE file");

  WavData out;
  bool have_fmt = false;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const unsigned char *chunk = bytes.data() + pos;
    std::uint32_t size = GetU32(chunk + 4);
    std::size_t body = pos + 8;
    if (body + size > bytes.size()) size = static_cast<std::uint32_t>(bytes.size() - body);
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (size < 16) throw std::runtime_error(path.string() + ": short fmt chunk");
      std::uint16_t format = GetU16(bytes.data() + body);
      std::uint16_t channels = GetU16(bytes.data() + body + 2);
      out.sample_rate = static_cast<int>(GetU32(bytes.data() + body + 4));
      std::uint16_t bits = GetU16(bytes.data() + body + 14);
      if (format != 1 || bits != 16)
        throw std::runtime_error(path.string() + ": only 16-bit PCM is supported");
      if (channels != 1) throw std::runtime_error(path.string() + ": only mono is supported");
      have_fmt = true;
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      if (!have_fmt) throw std::runtime_error(path.string() + ": data chunk before fmt");
      out.samples.resize(size / 2);
      for (std::size_t i = 0; i < out.samples.size(); ++i) {
        auto v = static_cast<std::int16_t>(GetU16(bytes.data() + body + 2 * i));
        out.samples[i] = std::max(-1.0, v / 32767.0);
      }
      return out;
    }
    pos = body + size + (size & 1);
  }
  throw std::runtime_error(path.string() + ": no data chunk");
}

}  // namespace usvs
