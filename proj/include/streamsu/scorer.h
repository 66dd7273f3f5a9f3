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

#ifndef STREAMSU_SCORER_H_
#define STREAMSU_SCORER_H_

#include <atomic>
#include <cstdint>
#include <span>
#include <vector>

#include "streamsu/lattice.h"

namespace streamsu {

// Autoregressive next-token scorer standing in for the attention decoder.
// `prefix` starts with sos. `context` is the lattice the decoder attends
// over; implementations may only look at what a decoder could see there.
class AttnScorer {
 public:
  virtual ~AttnScorer() = default;

  // V log-probs over the vocabulary. Blank and sos are never predicted.
  // Every call counts as one neural function evaluation.
  std::vector<double> NextLogProbs(std::span<const int> prefix,
                                   const EmissionLattice& context) const {
    nfe_.fetch_add(1, std::memory_order_relaxed);
    return Compute(prefix, context);
  }

  int64_t nfe() const { return nfe_.load(std::memory_order_relaxed); }
  void ResetNfe() { nfe_.store(0, std::memory_order_relaxed); }

 protected:
  virtual std::vector<double> Compute(std::span<const int> prefix,
                                      const EmissionLattice& context) const = 0;

 private:
  mutable std::atomic<int64_t> nfe_{0};
};

struct NfeReport {
  int64_t attn_evals = 0;
  int64_t ctc_frames_scored = 0;
  int64_t decode_rounds = 0;

  NfeReport& operator+=(const NfeReport& o) {
    attn_evals += o.attn_evals;
    ctc_frames_scored += o.ctc_frames_scored;
    decode_rounds += o.decode_rounds;
    return *this;
  }
};

struct NgramScorerConfig {
  double logit_sigma = 1.5;
  // Expected output length is context duration * tokens_per_second.
  double tokens_per_second = 2.5;
  // eos logit slope per token past (or short of) the expected length.
  double eos_slope = 1.5;
  double eos_bias = -2.0;
};

// Seeded conditional tables keyed by the last (order - 1) tokens, plus a
// frame-proportional length model on eos.
class NgramScorer : public AttnScorer {
 public:
  NgramScorer(int order, Vocab vocab, uint64_t seed, NgramScorerConfig cfg = {});

 protected:
  std::vector<double> Compute(std::span<const int> prefix,
                              const EmissionLattice& context) const override;

 private:
  int order_;
  Vocab vocab_;
  uint64_t seed_;
  NgramScorerConfig cfg_;
};

struct TeacherScorerConfig {
  double peak = 8.0;         // logit boost of the predicted token
  double logit_sigma = 1.0;  // seeded background logits, clipped at 3 sigma
  // Share of `peak` the intended token keeps when a wrong token is peaked.
  double residual = 0.5;
  double frame_duration = 0.04;
};

// Knows the utterance truth. With probability `fidelity` (drawn per prefix)
// it peaks the next truth token audible in the context, or eos once every
// audible token has been produced; otherwise a seeded wrong token.
class TeacherScorer : public AttnScorer {
 public:
  TeacherScorer(const SyntheticUtterance& utt, double fidelity, Vocab vocab,
                uint64_t seed, TeacherScorerConfig cfg = {});

  double fidelity() const { return fidelity_; }

 protected:
  std::vector<double> Compute(std::span<const int> prefix,
                              const EmissionLattice& context) const override;

 private:
  std::vector<int> truth_;
  std::vector<int> alignment_;
  double fidelity_;
  Vocab vocab_;
  uint64_t seed_;
  TeacherScorerConfig cfg_;
};

}  // namespace streamsu

#endif  // STREAMSU_SCORER_H_
