// src/corpus.cc

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

#include "usvs/corpus.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

#include "json.hpp"

#include "usvs/wav_io.h"

namespace usvs {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kRampSeconds = 0.005;
constexpr double kConsonantRms = 0.25;

std::vector<PhonemeInfo> BuildInventory() {
  auto vowel = [](const char *s, double f1, double f2, double f3) {
    return PhonemeInfo{s, PhonemeClass::kVowel, {f1, f2, f3}, {80.0, 100.0, 150.0}};
  };
  auto consonant = [](const char *s, double centre, double width) {
    return PhonemeInfo{s, PhonemeClass::kConsonant, {centre, 0, 0}, {width, 0, 0}};
  };
  auto rest = [](const char *s) { return PhonemeInfo{s, PhonemeClass::kRest, {0, 0, 0}, {0, 0, 0}}; };
  return {
      // Peterson & Barney (1952), adult male averages.
      vowel("a", 730, 1090, 2440),   // /aa/
      vowel("e", 530, 1840, 2480),   // /eh/
      vowel("i", 270, 2290, 3010),   // /iy/
      vowel("o", 570, 840, 2410),    // /ao/
      vowel("u", 300, 870, 2240),    // /uw/
      vowel("ae", 660, 1720, 2410),  // /ae/
      vowel("ih", 390, 1990, 2550),  // /ih/
      vowel("uh", 440, 1020, 2240),  // /uh/
      consonant("s", 6000, 2500),
      consonant("sh", 3000, 1500),
      consonant("f", 4000, 4000),
      consonant("h", 1500, 2000),
      rest("sil"),
      rest("SP"),
      rest("AP"),
  };
}

std::uint64_t Fnv1a(std::string_view s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::uint64_t SplitMix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

const PhonemeInfo &Lookup(const std::string &symbol) {
  int id = PhonemeId(symbol);
  if (id < 0) throw std::invalid_argument("unknown phoneme symbol '" + symbol + "'");
  return PhonemeInventory()[id];
}

bool IsVoicedNote(const MusicScore &score, std::size_t i) {
  return score.pitches[i] > 0 && Lookup(score.phonemes[i]).cls == PhonemeClass::kVowel;
}

std::vector<std::size_t> NoteBoundaries(const MusicScore &score, int sample_rate,
                                        std::size_t num_samples) {
  std::vector<std::size_t> b(score.size() + 1, 0);
  double cum = 0.0;
  for (std::size_t i = 0; i < score.size(); ++i) {
    cum += score.durations[i];
    b[i + 1] = std::min<std::size_t>(num_samples, std::llround(cum * sample_rate));
  }
  b.back() = num_samples;
  return b;
}

double VibratoFactor(const ToyVoiceOptions &opts, double t) {
  if (!opts.vibrato) return 1.0;
  double cents = opts.vibrato_depth_cents * std::sin(2.0 * std::numbers::pi * opts.vibrato_rate_hz * t);
  return std::pow(2.0, cents / 1200.0);
}

// Relative amplitude of harmonic h: 1/h source tilt times a sum of Lorentzian
// formant resonances over a small floor.
std::vector<double> HarmonicAmplitudes(const PhonemeInfo &ph, double f0, int sample_rate) {
  const double gains[3] = {1.0, 0.6, 0.3};
  std::vector<double> amps;
  double energy = 0.0;
  for (int h = 1; h * f0 < 0.45 * sample_rate; ++h) {
    double f = h * f0;
    double env = 0.1;
    for (int k = 0; k < 3; ++k) {
      double x = (f - ph.formants[k]) / (0.5 * ph.bandwidths[k]);
      env += gains[k] / (1.0 + x * x);
    }
    double a = env / h;
    amps.push_back(a);
    energy += a * a;
  }
  double norm = energy > 0 ? 1.0 / std::sqrt(energy) : 0.0;
  for (double &a : amps) a *= norm;
  return amps;
}

// RBJ constant-peak band-pass biquad.
struct BandPass {
  double b0, b2, a1, a2;
  double x1 = 0, x2 = 0, y1 = 0, y2 = 0;

  BandPass(double centre, double width, int sample_rate) {
    double nyq = 0.5 * sample_rate;
    centre = std::min(centre, 0.8 * nyq);
    double q = std::max(0.3, centre / width);
    double w0 = 2.0 * std::numbers::pi * centre / sample_rate;
    double alpha = std::sin(w0) / (2.0 * q);
    double a0 = 1.0 + alpha;
    b0 = alpha / a0;
    b2 = -alpha / a0;
    a1 = -2.0 * std::cos(w0) / a0;
    a2 = (1.0 - alpha) / a0;
  }

  double operator()(double x) {
    double y = b0 * x + b2 * x2 - a1 * y1 - a2 * y2;
    x2 = x1;
    x1 = x;
    y2 = y1;
    y1 = y;
    return y;
  }
};

std::string FormatDouble(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::vector<std::string> Tokens(std::string_view field) {
  std::vector<std::string> out;
  std::istringstream is{std::string(field)};
  std::string tok;
  while (is >> tok) out.push_back(tok);
  return out;
}

}  // namespace

const std::vector<PhonemeInfo> &PhonemeInventory() {
  static const std::vector<PhonemeInfo> inventory = BuildInventory();
  return inventory;
}

int PhonemeId(std::string_view symbol) {
  const auto &inv = PhonemeInventory();
  for (std::size_t i = 0; i < inv.size(); ++i)
    if (inv[i].symbol == symbol) return static_cast<int>(i);
  return -1;
}

double MusicScore::TotalDuration() const {
  double total = 0.0;
  for (double d : durations) total += d;
  return total;
}

void MusicScore::Validate() const {
  if (phonemes.empty()) throw std::invalid_argument("score has no notes");
  if (pitches.size() != phonemes.size() || durations.size() != phonemes.size())
    throw std::invalid_argument("score fields have different lengths");
  for (std::size_t i = 0; i < size(); ++i) {
    if (PhonemeId(phonemes[i]) < 0)
      throw std::invalid_argument("unknown phoneme symbol '" + phonemes[i] + "'");
    if (pitches[i] < 0 || pitches[i] > 127)
      throw std::invalid_argument("pitch " + std::to_string(pitches[i]) + " outside MIDI range 0-127");
    if (!(durations[i] > 0.0) || !std::isfinite(durations[i]))
      throw std::invalid_argument("note " + std::to_string(i) + " has non-positive duration");
  }
}

double MidiToHz(double midi) { return 440.0 * std::pow(2.0, (midi - 69.0) / 12.0); }

void AnalyticPitchTrack(const MusicScore &score, int sample_rate, std::size_t num_samples,
                        const ToyVoiceOptions &opts, std::vector<double> *f0,
                        std::vector<bool> *vuv) {
  const std::size_t frames = 1 + num_samples / opts.hop_length;
  const auto bounds = NoteBoundaries(score, sample_rate, num_samples);
  f0->assign(frames, 0.0);
  vuv->assign(frames, false);
  std::size_t note = 0;
  for (std::size_t t = 0; t < frames; ++t) {
    std::size_t c = t * opts.hop_length;
    if (c >= num_samples) break;
    while (note + 1 < score.size() && c >= bounds[note + 1]) ++note;
    if (!IsVoicedNote(score, note)) continue;
    (*f0)[t] = MidiToHz(score.pitches[note]) * VibratoFactor(opts, static_cast<double>(c) / sample_rate);
    (*vuv)[t] = true;
  }
}

Utterance SynthesizeToyVoice(const MusicScore &score, int sample_rate, std::uint64_t seed,
                             const ToyVoiceOptions &opts) {
  score.Validate();
  if (sample_rate < 8000) throw std::invalid_argument("sample rate must be at least 8000 Hz");

  Utterance utt;
  utt.sample_rate = sample_rate;
  utt.score = score;
  utt.hop_length = opts.hop_length;
  const std::size_t n = static_cast<std::size_t>(std::llround(score.TotalDuration() * sample_rate));
  utt.waveform.assign(n, 0.0);

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const auto bounds = NoteBoundaries(score, sample_rate, n);
  const double ramp = kRampSeconds * sample_rate;
  double phase = 0.0;

  for (std::size_t i = 0; i < score.size(); ++i) {
    const PhonemeInfo &ph = Lookup(score.phonemes[i]);
    const std::size_t begin = bounds[i], end = bounds[i + 1];
    if (begin >= end) continue;
    auto envelope = [&](std::size_t s) {
      double e = std::min({1.0, (s - begin + 1) / ramp, (end - s) / ramp});
      return std::max(0.0, e);
    };
    if (ph.cls == PhonemeClass::kVowel && score.pitches[i] > 0) {
      const double base = MidiToHz(score.pitches[i]);
      const auto amps = HarmonicAmplitudes(ph, base, sample_rate);
      for (std::size_t s = begin; s < end; ++s) {
        double f = base * VibratoFactor(opts, static_cast<double>(s) / sample_rate);
        phase = std::fmod(phase + 2.0 * std::numbers::pi * f / sample_rate, 2.0 * std::numbers::pi);
        // Chebyshev recurrence for sin(h*phase).
        double c2 = 2.0 * std::cos(phase);
        double prev = 0.0, cur = std::sin(phase), acc = 0.0;
        for (std::size_t h = 0; h < amps.size(); ++h) {
          acc += amps[h] * cur;
          double next = c2 * cur - prev;
          prev = cur;
          cur = next;
        }
        utt.waveform[s] = acc * envelope(s);
      }
    } else if (ph.cls == PhonemeClass::kConsonant) {
      BandPass filter(ph.formants[0], ph.bandwidths[0], sample_rate);
      double energy = 0.0;
      for (std::size_t s = begin; s < end; ++s) {
        double y = filter(gauss(rng));
        utt.waveform[s] = y;
        energy += y * y;
      }
      double rms = std::sqrt(energy / static_cast<double>(end - begin));
      double gain = rms > 0 ? kConsonantRms / rms : 0.0;
      for (std::size_t s = begin; s < end; ++s) utt.waveform[s] *= gain * envelope(s);
    }
    // Rests (and vowels sung at pitch 0) stay silent.
  }

  double peak = 0.0;
  for (double x : utt.waveform) peak = std::max(peak, std::abs(x));
  if (peak > 0.0)
    for (double &x : utt.waveform) x *= opts.peak / peak;

  AnalyticPitchTrack(score, sample_rate, n, opts, &utt.f0_ref, &utt.vuv_ref);
  return utt;
}

std::string_view SplitName(Split s) {
  switch (s) {
    case Split::kTrain: return "train";
    case Split::kDev: return "dev";
    case Split::kTest: return "test";
  }
  return "train";
}

Split ParseSplit(std::string_view name) {
  if (name == "train") return Split::kTrain;
  if (name == "dev") return Split::kDev;
  if (name == "test") return Split::kTest;
  throw std::invalid_argument("unknown split tag '" + std::string(name) + "' (expected train, dev or test)");
}

const ManifestEntry &CorpusManifest::Find(std::string_view id) const {
  for (const auto &e : entries)
    if (e.id == id) return e;
  throw std::out_of_range("no manifest entry with id '" + std::string(id) + "'");
}

MusicScore RandomScore(std::uint64_t seed, int sample_rate, const CorpusOptions &opts) {
  std::mt19937_64 rng(seed);
  const auto &inv = PhonemeInventory();
  std::vector<int> vowels, consonants;
  for (std::size_t i = 0; i < inv.size(); ++i) {
    if (inv[i].cls == PhonemeClass::kVowel) vowels.push_back(static_cast<int>(i));
    if (inv[i].cls == PhonemeClass::kConsonant) consonants.push_back(static_cast<int>(i));
  }
  std::uniform_int_distribution<int> n_notes(opts.min_notes, opts.max_notes);
  std::uniform_int_distribution<int> start_pitch(opts.min_pitch, opts.max_pitch);
  std::uniform_int_distribution<int> step(-4, 4);
  std::uniform_real_distribution<double> kind(0.0, 1.0);
  std::uniform_real_distribution<double> dur(opts.min_duration, opts.max_duration);
  std::uniform_int_distribution<std::size_t> pick_vowel(0, vowels.size() - 1);
  std::uniform_int_distribution<std::size_t> pick_consonant(0, consonants.size() - 1);

  // Durations live on the analysis hop grid so score frames and audio frames agree.
  const double grid = static_cast<double>(opts.voice.hop_length) / sample_rate;
  const long min_k = std::max<long>(1, std::lround(std::ceil(opts.min_duration / grid - 1e-9)));
  const long max_k = std::max<long>(min_k, std::lround(std::floor(opts.max_duration / grid + 1e-9)));

  MusicScore score;
  const int count = n_notes(rng);
  int pitch = start_pitch(rng);
  for (int i = 0; i < count; ++i) {
    pitch = std::clamp(pitch + (i == 0 ? 0 : step(rng)), opts.min_pitch, opts.max_pitch);
    double k = kind(rng);
    long frames = std::clamp<long>(std::lround(dur(rng) / grid), min_k, max_k);
    double d = frames * grid;
    if (i > 0 && k < 0.1) {
      score.phonemes.push_back("sil");
      score.pitches.push_back(0);
    } else if (i > 0 && k < 0.25) {
      score.phonemes.push_back(inv[consonants[pick_consonant(rng)]].symbol);
      score.pitches.push_back(pitch);
    } else {
      score.phonemes.push_back(inv[vowels[pick_vowel(rng)]].symbol);
      score.pitches.push_back(pitch);
    }
    score.durations.push_back(d);
  }
  return score;
}

CorpusManifest GenerateCorpus(int num_utts, int sample_rate, std::uint64_t seed,
                              const fs::path &out_dir, const CorpusOptions &opts) {
  if (num_utts < 3) throw std::invalid_argument("num_utts must be at least 3 so every split is non-empty");
  if (sample_rate < 8000 || sample_rate > 48000)
    throw std::invalid_argument("sample rate must be within 8000..48000 Hz");

  std::error_code ec;
  fs::create_directories(out_dir / "scores", ec);
  fs::create_directories(out_dir / "wavs", ec);
  if (ec || !fs::is_directory(out_dir / "wavs"))
    throw std::runtime_error("output directory " + out_dir.string() + " is not writable");

  CorpusManifest manifest;
  manifest.sample_rate = sample_rate;
  manifest.seed = seed;
  manifest.root = out_dir;

  std::vector<std::string> ids;
  for (int i = 0; i < num_utts; ++i) {
    char id[32];
    std::snprintf(id, sizeof(id), "utt%04d", i);
    ids.emplace_back(id);
    const std::uint64_t utt_seed = SplitMix(seed * 0x100000001b3ull + static_cast<std::uint64_t>(i));
    MusicScore score = RandomScore(utt_seed, sample_rate, opts);
    Utterance utt = SynthesizeToyVoice(score, sample_rate, SplitMix(utt_seed), opts.voice);
    ManifestEntry e{id, "scores/" + std::string(id) + ".txt", "wavs/" + std::string(id) + ".wav",
                    Split::kTrain};
    SaveScoreFile(score, manifest.ScorePath(e));
    WriteWav(manifest.AudioPath(e), utt.waveform, sample_rate);
    manifest.entries.push_back(e);
  }

  // 80/10/10 split over ids ordered by hash; dev and test always get one entry.
  std::vector<std::size_t> order(ids.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::pair(Fnv1a(ids[a]), a) < std::pair(Fnv1a(ids[b]), b);
  });
  const std::size_t n_dev = std::max<std::size_t>(1, std::lround(0.1 * num_utts));
  const std::size_t n_test = n_dev;
  const std::size_t n_train = num_utts - n_dev - n_test;
  for (std::size_t rank = 0; rank < order.size(); ++rank) {
    Split s = rank < n_train ? Split::kTrain : rank < n_train + n_dev ? Split::kDev : Split::kTest;
    manifest.entries[order[rank]].split = s;
  }

  SaveManifest(manifest, out_dir / "manifest.jsonl");
  return manifest;
}

MusicScore ParseScore(std::string_view text) {
  MusicScore score;
  std::istringstream is{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::vector<std::string_view> fields;
    std::string_view rest(line);
    for (std::size_t bar; (bar = rest.find('|')) != std::string_view::npos;) {
      fields.push_back(rest.substr(0, bar));
      rest.remove_prefix(bar + 1);
    }
    fields.push_back(rest);
    if (fields.size() != 3)
      throw ParseError("expected 'phoneme|midi_pitch|duration_seconds'", lineno);
    auto ph = Tokens(fields[0]), pi = Tokens(fields[1]), du = Tokens(fields[2]);
    if (ph.size() != pi.size() || ph.size() != du.size())
      throw ParseError("length mismatch: " + std::to_string(ph.size()) + " phonemes, " +
                           std::to_string(pi.size()) + " pitches, " + std::to_string(du.size()) +
                           " durations",
                       lineno);
    for (std::size_t i = 0; i < ph.size(); ++i) {
      int p = 0;
      auto [pe, pec] = std::from_chars(pi[i].data(), pi[i].data() + pi[i].size(), p);
      if (pec != std::errc() || pe != pi[i].data() + pi[i].size())
        throw ParseError("non-numeric pitch '" + pi[i] + "'", lineno);
      double d = 0.0;
      auto [de, dec] = std::from_chars(du[i].data(), du[i].data() + du[i].size(), d);
      if (dec != std::errc() || de != du[i].data() + du[i].size())
        throw ParseError("non-numeric duration '" + du[i] + "'", lineno);
      if (PhonemeId(ph[i]) < 0) throw ParseError("unknown phoneme symbol '" + ph[i] + "'", lineno);
      if (p < 0 || p > 127) throw ParseError("pitch " + pi[i] + " outside MIDI range 0-127", lineno);
      if (!(d > 0.0) || !std::isfinite(d)) throw ParseError("duration must be positive", lineno);
      score.phonemes.push_back(ph[i]);
      score.pitches.push_back(p);
      score.durations.push_back(d);
    }
  }
  if (score.phonemes.empty()) throw ParseError("no notes", 0);
  return score;
}

MusicScore LoadScoreFile(const fs::path &path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open score file " + path.string());
  std::stringstream ss;
  ss << is.rdbuf();
  try {
    return ParseScore(ss.str());
  } catch (const ParseError &e) {
    throw ParseError(path.string() + ": " + e.what(), e.line());
  }
}

void SaveScoreFile(const MusicScore &score, const fs::path &path) {
  score.Validate();
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw std::runtime_error("cannot write score file " + path.string());
  os << "# phoneme|midi_pitch|duration_seconds\n";
  for (std::size_t i = 0; i < score.size(); ++i)
    os << score.phonemes[i] << '|' << score.pitches[i] << '|' << FormatDouble(score.durations[i]) << '\n';
  if (!os) throw std::runtime_error("failed writing " + path.string());
}

void SaveManifest(const CorpusManifest &manifest, const fs::path &path) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw std::runtime_error("cannot write manifest " + path.string());
  os << json{{"sample_rate", manifest.sample_rate}, {"seed", manifest.seed}}.dump() << '\n';
  for (const auto &e : manifest.entries) {
    json j = {{"id", e.id}, {"score", e.score}, {"audio", e.audio}, {"split", SplitName(e.split)}};
    os << j.dump() << '\n';
  }
}

CorpusManifest LoadManifest(const fs::path &path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open manifest " + path.string());
  CorpusManifest manifest;
  manifest.root = path.parent_path();
  std::set<std::string> seen;
  std::string line;
  int lineno = 0;
  bool have_header = false;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception &e) {
      throw ParseError(std::string("manifest: ") + e.what(), lineno);
    }
    if (j.contains("sample_rate")) {
      manifest.sample_rate = j.at("sample_rate").get<int>();
      manifest.seed = j.value("seed", std::uint64_t{0});
      have_header = true;
      continue;
    }
    ManifestEntry e;
    try {
      e.id = j.at("id").get<std::string>();
      e.score = j.at("score").get<std::string>();
      e.audio = j.at("audio").get<std::string>();
      e.split = ParseSplit(j.at("split").get<std::string>());
    } catch (const json::exception &ex) {
      throw ParseError(std::string("manifest entry: ") + ex.what(), lineno);
    }
    if (!seen.insert(e.id).second) throw ParseError("duplicate id '" + e.id + "'", lineno);
    if (!fs::exists(manifest.ScorePath(e)) || !fs::exists(manifest.AudioPath(e)))
      throw std::runtime_error("manifest entry '" + e.id + "' references a missing file");
    manifest.entries.push_back(std::move(e));
  }
  if (!have_header) throw ParseError("manifest has no header object", 0);
  return manifest;
}

std::vector<std::string> SplitManifest(const CorpusManifest &manifest, std::string_view split) {
  const Split want = ParseSplit(split);
  std::vector<std::string> ids;
  for (const auto &e : manifest.entries)
    if (e.split == want) ids.push_back(e.id);
  return ids;
}

Utterance LoadUtterance(const CorpusManifest &manifest, const ManifestEntry &entry,
                        const ToyVoiceOptions &opts) {
  WavData wav = ReadWav(manifest.AudioPath(entry));
  Utterance utt;
  utt.id = entry.id;
  utt.sample_rate = wav.sample_rate;
  utt.waveform = std::move(wav.samples);
  utt.score = LoadScoreFile(manifest.ScorePath(entry));
  utt.hop_length = opts.hop_length;
  AnalyticPitchTrack(utt.score, utt.sample_rate, utt.waveform.size(), opts, &utt.f0_ref, &utt.vuv_ref);
  return utt;
}

}  // namespace usvs
