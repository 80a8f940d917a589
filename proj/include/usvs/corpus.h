// include/usvs/corpus.h

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

#ifndef USVS_CORPUS_H_
#define USVS_CORPUS_H_

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace usvs {

enum class PhonemeClass { kVowel, kConsonant, kRest };

/// One entry of the toy phoneme inventory. Vowels carry three formant
/// frequencies/bandwidths (Hz); consonants use formants[0] / bandwidths[0] as
/// the centre and width of their noise band.
struct PhonemeInfo {
  std::string symbol;
  PhonemeClass cls;
  double formants[3];
  double bandwidths[3];
};

/// 8 vowels (Peterson & Barney male averages), 4 unvoiced consonants and the
/// rest symbols "sil", "SP", "AP". Order is stable; the index is the phoneme id.
const std::vector<PhonemeInfo> &PhonemeInventory();
/// Returns -1 when the symbol is not in the inventory.
int PhonemeId(std::string_view symbol);

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string &what, int line)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

struct MusicScore {
  std::vector<std::string> phonemes;
  std::vector<int> pitches;       // MIDI 0..127, 0 = rest
  std::vector<double> durations;  // seconds

  std::size_t size() const { return phonemes.size(); }
  double TotalDuration() const;
  /// Throws std::invalid_argument on any invariant violation.
  void Validate() const;
  bool operator==(const MusicScore &other) const = default;
};

double MidiToHz(double midi);

struct ToyVoiceOptions {
  int hop_length = 256;
  bool vibrato = false;
  double vibrato_rate_hz = 5.0;
  double vibrato_depth_cents = 30.0;
  double peak = 0.95;
};

struct Utterance {
  std::string id;
  std::vector<double> waveform;
  int sample_rate = 0;
  MusicScore score;
  int hop_length = 256;
  std::vector<double> f0_ref;  // Hz, 0 when unvoiced
  std::vector<bool> vuv_ref;
};

/// Renders a score with a harmonic-plus-noise toy voice. Pure in
/// (score, sample_rate, seed, opts).
Utterance SynthesizeToyVoice(const MusicScore &score, int sample_rate, std::uint64_t seed,
                             const ToyVoiceOptions &opts = {});

/// Frame-level analytic pitch track for a score (frame t centred on sample t*hop).
void AnalyticPitchTrack(const MusicScore &score, int sample_rate, std::size_t num_samples,
                        const ToyVoiceOptions &opts, std::vector<double> *f0,
                        std::vector<bool> *vuv);

enum class Split { kTrain, kDev, kTest };
std::string_view SplitName(Split s);
/// Throws std::invalid_argument for anything but train/dev/test.
Split ParseSplit(std::string_view name);

struct ManifestEntry {
  std::string id;
  std::string score;  // relative to the manifest directory
  std::string audio;
  Split split;
};

struct CorpusManifest {
  std::vector<ManifestEntry> entries;
  int sample_rate = 16000;
  std::uint64_t seed = 0;
  std::filesystem::path root;  // directory holding manifest.jsonl

  std::filesystem::path ScorePath(const ManifestEntry &e) const { return root / e.score; }
  std::filesystem::path AudioPath(const ManifestEntry &e) const { return root / e.audio; }
  const ManifestEntry &Find(std::string_view id) const;
};

struct CorpusOptions {
  int min_pitch = 50;
  int max_pitch = 80;
  int min_notes = 4;
  int max_notes = 16;
  double min_duration = 0.1;
  double max_duration = 0.8;
  ToyVoiceOptions voice;
};

/// Writes scores/, wavs/ and manifest.jsonl under out_dir.
CorpusManifest GenerateCorpus(int num_utts, int sample_rate, std::uint64_t seed,
                              const std::filesystem::path &out_dir,
                              const CorpusOptions &opts = {});

/// Random score as used by GenerateCorpus; durations snap to the hop grid.
MusicScore RandomScore(std::uint64_t seed, int sample_rate, const CorpusOptions &opts);

MusicScore ParseScore(std::string_view text);
MusicScore LoadScoreFile(const std::filesystem::path &path);
void SaveScoreFile(const MusicScore &score, const std::filesystem::path &path);

void SaveManifest(const CorpusManifest &manifest, const std::filesystem::path &path);
/// Loads and validates: unique ids, referenced files exist.
CorpusManifest LoadManifest(const std::filesystem::path &path);

std::vector<std::string> SplitManifest(const CorpusManifest &manifest, std::string_view split);

/// Loads waveform + score of one manifest entry and fills the analytic tracks.
Utterance LoadUtterance(const CorpusManifest &manifest, const ManifestEntry &entry,
                        const ToyVoiceOptions &opts = {});

}  // namespace usvs

#endif  // USVS_CORPUS_H_
