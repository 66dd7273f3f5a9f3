/* Copyright 2026 The streamsu Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#ifndef STREAMSU_LATTICE_H_
#define STREAMSU_LATTICE_H_

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace streamsu {

// Token inventory. Ids below kNumSpecial are reserved in the default layout,
// but any layout with distinct blank/sos/eos is accepted.
struct Vocab {
  std::vector<std::string> tokens;
  int blank_id = 0;
  int sos_id = 1;
  int eos_id = 2;

  int size() const { return static_cast<int>(tokens.size()); }
  bool IsSpecial(int id) const {
    return id == blank_id || id == sos_id || id == eos_id;
  }
  // True for ids a hypothesis may contain between sos and eos.
  bool IsWord(int id) const { return id >= 0 && id < size() && !IsSpecial(id); }
  std::vector<int> WordIds() const;

  // Throws InvalidConfig.
  void Validate() const;

  // <blank>, <sos>, <eos>, w00 ... w{num_words-1}.
  static Vocab Default(int num_words = 24);
};

// T x V natural-log posteriors, row-major.
class EmissionLattice {
 public:
  EmissionLattice() = default;
  EmissionLattice(int num_frames, int vocab_size, double frame_duration);
  EmissionLattice(int num_frames, int vocab_size, double frame_duration,
                  std::vector<double> log_probs);

  int num_frames() const { return num_frames_; }
  int vocab_size() const { return vocab_size_; }
  double frame_duration() const { return frame_duration_; }
  double duration_s() const { return num_frames_ * frame_duration_; }

  double at(int t, int c) const { return data_[Index(t, c)]; }
  double& at(int t, int c) { return data_[Index(t, c)]; }
  std::span<const double> row(int t) const {
    return {data_.data() + static_cast<size_t>(t) * vocab_size_,
            static_cast<size_t>(vocab_size_)};
  }
  std::span<double> row(int t) {
    return {data_.data() + static_cast<size_t>(t) * vocab_size_,
            static_cast<size_t>(vocab_size_)};
  }
  const std::vector<double>& data() const { return data_; }

  // First `frames` rows as a new lattice.
  EmissionLattice Prefix(int frames) const;

  // Largest |logsumexp(row)| over all rows.
  double MaxNormalizationError() const;

  // Throws ShapeError on empty lattice, NaN entries, or rows off by more
  // than `tol`.
  void Validate(double tol = 1e-6) const;

  bool operator==(const EmissionLattice& other) const = default;

 private:
  size_t Index(int t, int c) const {
    return static_cast<size_t>(t) * vocab_size_ + c;
  }

  int num_frames_ = 0;
  int vocab_size_ = 0;
  double frame_duration_ = 0.04;
  std::vector<double> data_;
};

struct SyntheticUtterance {
  int id = 0;
  std::vector<int> truth;      // word ids, no blank/sos/eos
  std::vector<int> alignment;  // emitting frame of each truth token
  double noise_level = 0.0;    // [0, 1]
  double duration_s = 0.0;
  uint64_t seed = 0;           // lattice rendering seed
};

struct LatticeConfig {
  double frame_duration = 0.04;
  // Added to the blank logit of the random component, so that noisy frames
  // still lean towards blank between aligned tokens.
  double blank_bias = 1.0;
  // Std-dev of the random component's logits; larger is peakier.
  double noise_sharpness = 2.0;
  // Probability floor applied to every entry before renormalization.
  double floor = 1e-8;
};

struct CorpusConfig {
  double min_duration_s = 2.0;
  double max_duration_s = 6.0;
  double tokens_per_second = 2.5;
  double lead_silence_s = 0.2;
  double trail_silence_s = 0.2;
  int max_tokens = 24;
};

// (noise_level, fraction) pairs.
using DifficultyMix = std::vector<std::pair<double, double>>;

int NumFrames(double duration_s, double frame_duration);

// Throws InvalidUtterance.
void ValidateUtterance(const SyntheticUtterance& utt, const Vocab& vocab,
                       const LatticeConfig& cfg = {});

// Truth-aligned one-hot emissions mixed with a seeded random distribution
// of weight utt.noise_level. Throws InvalidUtterance.
EmissionLattice MakeLattice(const SyntheticUtterance& utt, const Vocab& vocab,
                            uint64_t seed, const LatticeConfig& cfg = {});

// Convenience: renders with utt.seed.
inline EmissionLattice MakeLattice(const SyntheticUtterance& utt,
                                   const Vocab& vocab,
                                   const LatticeConfig& cfg = {}) {
  return MakeLattice(utt, vocab, utt.seed, cfg);
}

// Throws InvalidConfig on an empty mix, fractions not summing to one, or
// a bad duration range.
std::vector<SyntheticUtterance> GenCorpus(int n, const DifficultyMix& mix,
                                          uint64_t seed, const Vocab& vocab,
                                          const CorpusConfig& corpus_cfg = {},
                                          const LatticeConfig& lattice_cfg = {});

// Per-frame argmax followed by CTC collapse (merge repeats, drop blanks).
std::vector<int> GreedyCtcDecode(const EmissionLattice& lattice, int blank_id);

// Merge repeats and drop blanks.
std::vector<int> CtcCollapse(std::span<const int> path, int blank_id);

}  // namespace streamsu

#endif  // STREAMSU_LATTICE_H_
