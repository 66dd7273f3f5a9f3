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

#include "streamsu/lattice.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "streamsu/errors.h"
#include "streamsu/log_math.h"
#include "streamsu/seeding.h"

namespace streamsu {

std::vector<int> Vocab::WordIds() const {
  std::vector<int> ids;
  for (int i = 0; i < size(); ++i) {
    if (!IsSpecial(i)) ids.push_back(i);
  }
  return ids;
}

void Vocab::Validate() const {
  if (size() < 4) throw InvalidConfig("vocab: size must be >= 4");
  auto in_range = [this](int id) { return id >= 0 && id < size(); };
  if (!in_range(blank_id) || !in_range(sos_id) || !in_range(eos_id)) {
    throw InvalidConfig("vocab: special ids out of range");
  }
  if (blank_id == sos_id || blank_id == eos_id || sos_id == eos_id) {
    throw InvalidConfig("vocab: blank_id, sos_id, eos_id must be distinct");
  }
}

Vocab Vocab::Default(int num_words) {
  Vocab v;
  v.tokens = {"<blank>", "<sos>", "<eos>"};
  for (int i = 0; i < num_words; ++i) {
    std::ostringstream os;
    os << 'w' << (i < 10 ? "0" : "") << i;
    v.tokens.push_back(os.str());
  }
  return v;
}

EmissionLattice::EmissionLattice(int num_frames, int vocab_size,
                                 double frame_duration)
    : num_frames_(num_frames),
      vocab_size_(vocab_size),
      frame_duration_(frame_duration),
      data_(static_cast<size_t>(num_frames) * vocab_size, kLogZero) {}

EmissionLattice::EmissionLattice(int num_frames, int vocab_size,
                                 double frame_duration,
                                 std::vector<double> log_probs)
    : num_frames_(num_frames),
      vocab_size_(vocab_size),
      frame_duration_(frame_duration),
      data_(std::move(log_probs)) {
  if (data_.size() != static_cast<size_t>(num_frames) * vocab_size) {
    throw ShapeError("lattice: data size does not match T x V");
  }
}

EmissionLattice EmissionLattice::Prefix(int frames) const {
  if (frames < 0 || frames > num_frames_) {
    throw ShapeError("lattice: prefix length out of range");
  }
  std::vector<double> head(data_.begin(),
                           data_.begin() + static_cast<long>(frames) * vocab_size_);
  return EmissionLattice(frames, vocab_size_, frame_duration_, std::move(head));
}

double EmissionLattice::MaxNormalizationError() const {
  double worst = 0.0;
  for (int t = 0; t < num_frames_; ++t) {
    worst = std::max(worst, std::abs(LogSumExp(row(t))));
  }
  return worst;
}

void EmissionLattice::Validate(double tol) const {
  if (num_frames_ < 1 || vocab_size_ < 1) throw ShapeError("lattice: empty");
  for (double x : data_) {
    if (std::isnan(x)) throw ShapeError("lattice: NaN entry");
  }
  if (MaxNormalizationError() > tol) {
    throw ShapeError("lattice: rows are not normalized");
  }
}

int NumFrames(double duration_s, double frame_duration) {
  return std::max(1, static_cast<int>(std::lround(duration_s / frame_duration)));
}

void ValidateUtterance(const SyntheticUtterance& utt, const Vocab& vocab,
                       const LatticeConfig& cfg) {
  if (utt.truth.empty()) throw InvalidUtterance("utterance: empty truth");
  if (utt.alignment.size() != utt.truth.size()) {
    throw InvalidUtterance("utterance: alignment and truth differ in length");
  }
  if (!(utt.noise_level >= 0.0 && utt.noise_level <= 1.0)) {
    throw InvalidUtterance("utterance: noise_level outside [0, 1]");
  }
  for (int tok : utt.truth) {
    if (!vocab.IsWord(tok)) {
      throw InvalidUtterance("utterance: truth contains a non-word token");
    }
  }
  const int num_frames = NumFrames(utt.duration_s, cfg.frame_duration);
  for (size_t i = 0; i < utt.alignment.size(); ++i) {
    if (utt.alignment[i] < 0 || utt.alignment[i] >= num_frames) {
      throw InvalidUtterance("utterance: alignment out of range");
    }
    if (i > 0) {
      if (utt.alignment[i] <= utt.alignment[i - 1]) {
        throw InvalidUtterance("utterance: alignment not strictly increasing");
      }
      // Without a blank in between, CTC collapse would merge the pair.
      if (utt.truth[i] == utt.truth[i - 1] &&
          utt.alignment[i] == utt.alignment[i - 1] + 1) {
        throw InvalidUtterance("utterance: adjacent repeated tokens");
      }
    }
  }
}

EmissionLattice MakeLattice(const SyntheticUtterance& utt, const Vocab& vocab,
                            uint64_t seed, const LatticeConfig& cfg) {
  ValidateUtterance(utt, vocab, cfg);
  const int num_frames = NumFrames(utt.duration_s, cfg.frame_duration);
  const int vsize = vocab.size();
  EmissionLattice lattice(num_frames, vsize, cfg.frame_duration);

  std::vector<int> target(num_frames, vocab.blank_id);
  for (size_t i = 0; i < utt.truth.size(); ++i) {
    target[utt.alignment[i]] = utt.truth[i];
  }

  // Random component lives on blank + words; sos/eos only get the floor.
  std::vector<int> support = vocab.WordIds();
  support.insert(support.begin(), vocab.blank_id);

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, cfg.noise_sharpness);
  std::vector<double> logits(support.size());
  std::vector<double> probs(vsize);
  const double noise = utt.noise_level;
  for (int t = 0; t < num_frames; ++t) {
    for (size_t j = 0; j < support.size(); ++j) {
      logits[j] = normal(rng) + (support[j] == vocab.blank_id ? cfg.blank_bias : 0.0);
    }
    const double lse = LogSumExp(logits);
    std::fill(probs.begin(), probs.end(), 0.0);
    for (size_t j = 0; j < support.size(); ++j) {
      probs[support[j]] = noise * std::exp(logits[j] - lse);
    }
    probs[target[t]] += 1.0 - noise;
    double total = 0.0;
    for (double& p : probs) {
      p += cfg.floor;
      total += p;
    }
    auto out = lattice.row(t);
    for (int c = 0; c < vsize; ++c) out[c] = std::log(probs[c] / total);
  }
  return lattice;
}

namespace {

std::vector<int> SplitCounts(int n, const DifficultyMix& mix) {
  std::vector<int> counts(mix.size());
  std::vector<std::pair<double, size_t>> remainders;
  int assigned = 0;
  for (size_t i = 0; i < mix.size(); ++i) {
    const double exact = n * mix[i].second;
    counts[i] = static_cast<int>(std::floor(exact + 1e-9));
    assigned += counts[i];
    remainders.emplace_back(exact - counts[i], i);
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (size_t k = 0; assigned < n; ++k, ++assigned) {
    counts[remainders[k % remainders.size()].second] += 1;
  }
  return counts;
}

}  // namespace

std::vector<SyntheticUtterance> GenCorpus(int n, const DifficultyMix& mix,
                                          uint64_t seed, const Vocab& vocab,
                                          const CorpusConfig& corpus_cfg,
                                          const LatticeConfig& lattice_cfg) {
  vocab.Validate();
  if (n < 0) throw InvalidConfig("corpus: n must be >= 0");
  if (mix.empty()) throw InvalidConfig("mix: empty difficulty mix");
  double total = 0.0;
  for (const auto& [noise, fraction] : mix) {
    if (!(noise >= 0.0 && noise <= 1.0)) {
      throw InvalidConfig("mix: noise_level outside [0, 1]");
    }
    if (fraction < 0.0) throw InvalidConfig("mix: negative fraction");
    total += fraction;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw InvalidConfig("mix: fractions must sum to 1");
  }
  if (!(corpus_cfg.min_duration_s > 0.0 &&
        corpus_cfg.max_duration_s >= corpus_cfg.min_duration_s)) {
    throw InvalidConfig("corpus: invalid duration range");
  }

  const std::vector<int> counts = SplitCounts(n, mix);
  std::vector<double> noise_levels;
  for (size_t i = 0; i < mix.size(); ++i) {
    noise_levels.insert(noise_levels.end(), counts[i], mix[i].first);
  }
  std::mt19937_64 rng(DeriveSeed({seed, 0xc0ffee}));
  std::shuffle(noise_levels.begin(), noise_levels.end(), rng);

  const std::vector<int> words = vocab.WordIds();
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<size_t> pick(0, words.size() - 1);

  std::vector<SyntheticUtterance> corpus;
  corpus.reserve(n);
  for (int i = 0; i < n; ++i) {
    SyntheticUtterance utt;
    utt.id = i;
    utt.noise_level = noise_levels[i];
    utt.seed = DeriveSeed({seed, static_cast<uint64_t>(i), 0x1a77});
    // Durations are quantized to whole frames so T * frame_duration equals
    // the recorded duration.
    const double raw = corpus_cfg.min_duration_s +
                       unit(rng) * (corpus_cfg.max_duration_s - corpus_cfg.min_duration_s);
    const double fd = lattice_cfg.frame_duration;
    int num_frames = static_cast<int>(std::floor(raw / fd + 1e-9));
    num_frames = std::max(num_frames,
                          static_cast<int>(std::ceil(corpus_cfg.min_duration_s / fd - 1e-9)));
    utt.duration_s = num_frames * fd;

    const int lo = std::min(num_frames - 1,
                            static_cast<int>(std::lround(corpus_cfg.lead_silence_s / fd)));
    const int hi = std::max(lo, num_frames - 1 -
                                    static_cast<int>(std::lround(corpus_cfg.trail_silence_s / fd)));
    const int span = hi - lo + 1;
    int n_tokens = static_cast<int>(
        std::lround(utt.duration_s * corpus_cfg.tokens_per_second * (0.8 + 0.4 * unit(rng))));
    n_tokens = std::clamp(n_tokens, 1, std::max(1, std::min(corpus_cfg.max_tokens, span / 2)));
    const double width = static_cast<double>(span) / n_tokens;
    const int jitter = std::max(0, static_cast<int>(std::floor(width)) - 2);
    for (int k = 0; k < n_tokens; ++k) {
      const int slot = lo + static_cast<int>(std::floor(k * width));
      const int offset = jitter > 0 ? static_cast<int>(unit(rng) * (jitter + 1)) : 0;
      utt.alignment.push_back(std::min(slot + std::min(offset, jitter), hi));
      utt.truth.push_back(words[pick(rng)]);
    }
    ValidateUtterance(utt, vocab, lattice_cfg);
    corpus.push_back(std::move(utt));
  }
  return corpus;
}

std::vector<int> CtcCollapse(std::span<const int> path, int blank_id) {
  std::vector<int> out;
  int prev = -1;
  for (int sym : path) {
    if (sym != prev && sym != blank_id) out.push_back(sym);
    prev = sym;
  }
  return out;
}

std::vector<int> GreedyCtcDecode(const EmissionLattice& lattice, int blank_id) {
  std::vector<int> path(lattice.num_frames());
  for (int t = 0; t < lattice.num_frames(); ++t) {
    auto row = lattice.row(t);
    path[t] = static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin());
  }
  return CtcCollapse(path, blank_id);
}

}  // namespace streamsu
