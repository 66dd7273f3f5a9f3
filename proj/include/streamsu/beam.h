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

#ifndef STREAMSU_BEAM_H_
#define STREAMSU_BEAM_H_

#include <memory>
#include <vector>

#include "streamsu/ctc.h"
#include "streamsu/lattice.h"
#include "streamsu/scorer.h"

namespace streamsu {

// CTC states of every one-token extension of a single prefix, indexed by
// token id. Non-word ids (and eos) hold empty states.
struct CtcExpansion {
  std::vector<CtcPrefixState> children;
  int frames = 0;
};

using ExpansionChain = std::vector<std::shared_ptr<const CtcExpansion>>;

struct Hypothesis {
  std::vector<int> tokens;  // tokens[0] is sos
  double attn_logp = 0.0;
  double ctc_psi = 0.0;
  double score = 0.0;
  bool ended = false;
  // Null once ended.
  std::shared_ptr<const CtcPrefixState> ctc_state;
  // Per generated token: combined log prob (score delta) and attention-only.
  std::vector<double> token_logp;
  std::vector<double> attn_token_logp;
  // expansions[j]: extensions of the first j generated tokens, recorded
  // when that prefix was expanded.
  ExpansionChain expansions;

  int num_generated() const { return static_cast<int>(tokens.size()) - 1; }
};

// Total order used for ranking: higher score first, then lexicographically
// smaller token ids, then shorter.
bool RanksBefore(const Hypothesis& a, const Hypothesis& b);

// Reference hypothesis produced by a pilot run on a partial input.
struct PilotReference {
  std::vector<int> tokens;  // no sos, no eos
  std::vector<double> token_logp;
  std::vector<double> attn_token_logp;
  std::shared_ptr<const CtcPrefixState> ctc_state;  // may be null if ended
  ExpansionChain expansions;
  double partial_len_s = 0.0;
  int partial_frames = 0;
  int pilot_index = 0;
};

struct BeamConfig {
  int beam_width = 5;
  double lambda = 0.7;  // attention weight; CTC gets 1 - lambda
  int max_tokens = 30;
  // Stop once the best ended score exceeds the best running one by more
  // than this. +inf disables end detection.
  double end_detect_margin = 0.0;
  bool collapse = false;
  bool early_term = false;
  int early_term_c = 5;
  bool leap = false;
  double leap_q = 0.8;

  // Throws InvalidConfig.
  void Validate() const;
};

struct DecodeResult {
  Hypothesis best;
  std::vector<Hypothesis> beam_final;  // ended and running, ranked
  NfeReport nfe;
  int rounds = 0;
  int collapse_hits = 0;
  int collapse_divergences = 0;
  int predicted_length = -1;  // -1 when early termination is off
  bool early_terminated = false;
  bool end_detected = false;
  int leap_extensions = 0;

  // best.tokens without sos/eos.
  std::vector<int> Output() const;
};

double CombinedScore(double lambda, double attn_logp, double ctc_psi);

enum class CollapseOutcome { kInactive, kHit, kDiverged, kExhausted };

struct CollapseTracker {
  bool armed = true;
  int hits = 0;
  int divergences = 0;
};

// Validates the latest token of the best running hypothesis (running must
// be ranked) against the reference. On a hit the beam is cut to that one
// hypothesis. A mismatch disarms the tracker for the rest of the decode; so
// does running past the end of the reference, without counting a
// divergence.
CollapseOutcome CollapseStep(std::vector<Hypothesis>& running,
                             const PilotReference& reference,
                             CollapseTracker& tracker);

// n = round(len_full / len_partial * n_p) + C. Throws InvalidState for a
// nonpositive partial length or negative n_p.
int PredictLength(double len_partial_s, double len_full_s, int n_p, int c);

inline bool EarlyTerminate(int round, int predicted_length, bool any_ended) {
  return round >= predicted_length && any_ended;
}

// Hybrid CTC/attention beam search. With `reference` and the matching
// config flags it applies beam collapse, early termination and CTC leap.
DecodeResult BeamSearch(const EmissionLattice& lattice, const AttnScorer& scorer,
                        const Vocab& vocab, const BeamConfig& cfg,
                        const PilotReference* reference = nullptr);

}  // namespace streamsu

#endif  // STREAMSU_BEAM_H_
