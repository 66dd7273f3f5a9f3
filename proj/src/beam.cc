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

#include "streamsu/beam.h"

#include <algorithm>
#include <cmath>

#include "streamsu/errors.h"
#include "streamsu/log_math.h"

namespace streamsu {

bool RanksBefore(const Hypothesis& a, const Hypothesis& b) {
  if (a.score != b.score) return a.score > b.score;
  return std::lexicographical_compare(a.tokens.begin(), a.tokens.end(),
                                      b.tokens.begin(), b.tokens.end());
}

void BeamConfig::Validate() const {
  if (beam_width < 1) throw InvalidConfig("beam.beam_width must be >= 1");
  if (max_tokens < 1) throw InvalidConfig("beam.max_tokens must be >= 1");
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw InvalidConfig("beam.lambda outside [0, 1]");
  if (!(end_detect_margin >= 0.0)) throw InvalidConfig("beam.end_detect_margin must be >= 0");
  if (early_term_c < 0) throw InvalidConfig("beam.early_term_c must be >= 0");
  if (!(leap_q >= 0.5 && leap_q <= 1.0)) throw InvalidConfig("beam.leap_q outside [0.5, 1]");
}

std::vector<int> DecodeResult::Output() const {
  std::vector<int> out(best.tokens.begin() + 1, best.tokens.end());
  if (best.ended && !out.empty()) out.pop_back();
  return out;
}

double CombinedScore(double lambda, double attn_logp, double ctc_psi) {
  return WeightedLog(lambda, attn_logp) + WeightedLog(1.0 - lambda, ctc_psi);
}

CollapseOutcome CollapseStep(std::vector<Hypothesis>& running,
                             const PilotReference& reference,
                             CollapseTracker& tracker) {
  if (!tracker.armed || running.empty()) return CollapseOutcome::kInactive;
  const Hypothesis& best = running.front();
  const int latest = best.num_generated();
  if (latest == 0) return CollapseOutcome::kInactive;
  if (latest > static_cast<int>(reference.tokens.size())) {
    tracker.armed = false;
    return CollapseOutcome::kExhausted;
  }
  if (best.tokens.back() != reference.tokens[latest - 1]) {
    ++tracker.divergences;
    tracker.armed = false;
    return CollapseOutcome::kDiverged;
  }
  ++tracker.hits;
  running.resize(1);
  return CollapseOutcome::kHit;
}

int PredictLength(double len_partial_s, double len_full_s, int n_p, int c) {
  if (!(len_partial_s > 0.0)) throw InvalidState("predict length: partial length must be > 0");
  if (n_p < 0) throw InvalidState("predict length: n_p must be >= 0");
  return static_cast<int>(std::lround(len_full_s / len_partial_s * n_p)) + c;
}

namespace {

// Cached extensions usable for a leap from `hyp`: the hypothesis must
// still agree with the reference token for token.
const CtcExpansion* LeapTable(const Hypothesis& hyp, const PilotReference& ref,
                              const EmissionLattice& lattice) {
  const int depth = hyp.num_generated();
  if (depth >= static_cast<int>(ref.expansions.size())) return nullptr;
  if (depth > static_cast<int>(ref.tokens.size())) return nullptr;
  if (!std::equal(hyp.tokens.begin() + 1, hyp.tokens.end(), ref.tokens.begin())) {
    return nullptr;
  }
  const CtcExpansion* table = ref.expansions[depth].get();
  if (table == nullptr || table->frames > lattice.num_frames()) return nullptr;
  return table;
}

}  // namespace

DecodeResult BeamSearch(const EmissionLattice& lattice, const AttnScorer& scorer,
                        const Vocab& vocab, const BeamConfig& cfg,
                        const PilotReference* reference) {
  cfg.Validate();
  if (lattice.num_frames() < 1) throw ShapeError("beam search: empty lattice");
  if (lattice.vocab_size() != vocab.size()) {
    throw ShapeError("beam search: lattice width differs from vocab size");
  }
  const CtcPrefixScorer ctc(vocab);
  const int vsize = vocab.size();

  DecodeResult result;
  Hypothesis root;
  root.tokens = {vocab.sos_id};
  root.ctc_state = std::make_shared<const CtcPrefixState>(ctc.Init(lattice));
  std::vector<Hypothesis> running = {std::move(root)};
  std::vector<Hypothesis> ended;

  CollapseTracker tracker;
  const bool use_collapse = reference != nullptr && cfg.collapse;
  const bool use_leap = reference != nullptr && cfg.leap;
  if (reference != nullptr && cfg.early_term && reference->partial_len_s > 0.0) {
    result.predicted_length =
        PredictLength(reference->partial_len_s, lattice.duration_s(),
                      static_cast<int>(reference->tokens.size()), cfg.early_term_c);
  }

  std::vector<Hypothesis> candidates;
  for (int round = 1; round <= cfg.max_tokens; ++round) {
    if (use_collapse) CollapseStep(running, *reference, tracker);

    candidates.clear();
    for (const Hypothesis& hyp : running) {
      const std::vector<double> attn = scorer.NextLogProbs(hyp.tokens, lattice);
      ++result.nfe.attn_evals;
      const CtcExpansion* leap = use_leap ? LeapTable(hyp, *reference, lattice) : nullptr;

      auto expansion = std::make_shared<CtcExpansion>();
      expansion->children.resize(vsize);
      expansion->frames = lattice.num_frames();
      std::vector<std::pair<int, double>> psis;
      for (int c = 0; c < vsize; ++c) {
        if (c == vocab.blank_id || c == vocab.sos_id) continue;
        CtcScore s;
        if (leap != nullptr && c != vocab.eos_id && !leap->children[c].empty()) {
          s = ctc.ExtendLeap(*hyp.ctc_state, leap->children[c], c, lattice, cfg.leap_q);
          ++result.leap_extensions;
        } else {
          s = ctc.Extend(*hyp.ctc_state, c, lattice);
        }
        result.nfe.ctc_frames_scored += s.frames_computed;
        psis.emplace_back(c, s.psi);
        expansion->children[c] = std::move(s.state);
      }

      for (const auto& [c, psi] : psis) {
        Hypothesis child;
        child.tokens = hyp.tokens;
        child.tokens.push_back(c);
        child.attn_logp = hyp.attn_logp + attn[c];
        child.ctc_psi = psi;
        child.score = CombinedScore(cfg.lambda, child.attn_logp, child.ctc_psi);
        child.ended = c == vocab.eos_id;
        if (!child.ended) {
          child.ctc_state = std::shared_ptr<const CtcPrefixState>(
              expansion, &expansion->children[c]);
        }
        child.token_logp = hyp.token_logp;
        child.token_logp.push_back(child.score == kLogZero ? kLogZero
                                                           : child.score - hyp.score);
        child.attn_token_logp = hyp.attn_token_logp;
        child.attn_token_logp.push_back(attn[c]);
        child.expansions = hyp.expansions;
        child.expansions.push_back(expansion);
        candidates.push_back(std::move(child));
      }
    }

    size_t keep = std::min<size_t>(cfg.beam_width, candidates.size());
    std::partial_sort(candidates.begin(), candidates.begin() + keep, candidates.end(),
                      RanksBefore);
    // Zero-probability candidates never enter the beam, unless nothing else
    // is left.
    if (candidates.front().score != kLogZero) {
      while (keep > 1 && candidates[keep - 1].score == kLogZero) --keep;
    }
    running.clear();
    for (size_t i = 0; i < keep; ++i) {
      if (candidates[i].ended) {
        ended.push_back(std::move(candidates[i]));
      } else {
        running.push_back(std::move(candidates[i]));
      }
    }
    result.rounds = round;

    if (result.predicted_length >= 0 &&
        EarlyTerminate(round, result.predicted_length, !ended.empty())) {
      result.early_terminated = true;
      break;
    }
    if (running.empty()) break;
    if (!ended.empty() && std::isfinite(cfg.end_detect_margin)) {
      const auto best_ended = std::min_element(ended.begin(), ended.end(), RanksBefore);
      if (best_ended->score > running.front().score + cfg.end_detect_margin) {
        result.end_detected = true;
        break;
      }
    }
  }

  result.nfe.decode_rounds = result.rounds;
  result.collapse_hits = tracker.hits;
  result.collapse_divergences = tracker.divergences;

  std::sort(ended.begin(), ended.end(), RanksBefore);
  result.best = ended.empty() ? running.front() : ended.front();
  result.beam_final = std::move(ended);
  result.beam_final.insert(result.beam_final.end(),
                           std::make_move_iterator(running.begin()),
                           std::make_move_iterator(running.end()));
  std::stable_sort(result.beam_final.begin(), result.beam_final.end(), RanksBefore);
  return result;
}

}  // namespace streamsu
