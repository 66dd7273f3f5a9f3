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

#include "streamsu/pilot.h"

#include <cmath>

#include "streamsu/errors.h"

namespace streamsu {

int PilotConfig::EffectiveTokenLimit() const {
  if (token_limit_mode == TokenLimitMode::kRatio) {
    return std::max(1, static_cast<int>(std::ceil(token_limit_ratio * avg_full_len - 1e-9)));
  }
  return token_limit;
}

void PilotConfig::Validate() const {
  if (!(granularity_s > 0.0)) throw InvalidConfig("pilot.granularity_s must be > 0");
  if (!(min_partial_s >= 0.0)) throw InvalidConfig("pilot.min_partial_s must be >= 0");
  if (!(granularity_growth >= 1.0)) throw InvalidConfig("pilot.granularity_growth must be >= 1");
  if (beam_width < 1) throw InvalidConfig("pilot.beam_width must be >= 1");
  if (token_limit < 1) throw InvalidConfig("pilot.token_limit must be >= 1");
  if (!(token_limit_ratio > 0.0)) throw InvalidConfig("pilot.token_limit_ratio must be > 0");
}

double PilotInterval(const PilotConfig& cfg, int i) {
  return cfg.granularity_s * std::pow(cfg.granularity_growth, i);
}

std::vector<double> SchedulePilots(double duration_s, const PilotConfig& cfg) {
  cfg.Validate();
  std::vector<double> triggers;
  if (!(duration_s > 0.0)) return triggers;
  // Fixed delta t is computed by index so long schedules do not drift.
  double t = cfg.min_partial_s;
  for (int i = 0; t < duration_s - 1e-9; ++i) {
    triggers.push_back(t);
    t = cfg.granularity_growth == 1.0
            ? cfg.min_partial_s + (i + 1) * cfg.granularity_s
            : t + PilotInterval(cfg, i);
  }
  return triggers;
}

PilotReference ReferenceFromDecode(const DecodeResult& result,
                                   const EmissionLattice& lattice, int pilot_index) {
  PilotReference ref;
  ref.tokens = result.Output();
  const size_t n = ref.tokens.size();
  ref.token_logp.assign(result.best.token_logp.begin(), result.best.token_logp.begin() + n);
  ref.attn_token_logp.assign(result.best.attn_token_logp.begin(),
                             result.best.attn_token_logp.begin() + n);
  ref.ctc_state = result.best.ctc_state;
  ref.expansions = result.best.expansions;
  ref.partial_len_s = lattice.duration_s();
  ref.partial_frames = lattice.num_frames();
  ref.pilot_index = pilot_index;
  return ref;
}

PilotOutcome RunPilot(const EmissionLattice& partial, const AttnScorer& scorer,
                      const Vocab& vocab, const PilotConfig& cfg,
                      const BeamConfig& beam, const PilotReference* prev,
                      int pilot_index) {
  cfg.Validate();
  BeamConfig pilot_beam = beam;
  pilot_beam.beam_width = cfg.beam_width;
  pilot_beam.max_tokens = cfg.EffectiveTokenLimit();
  const bool incremental = cfg.incremental && prev != nullptr;
  pilot_beam.collapse = incremental;
  pilot_beam.early_term = incremental;
  pilot_beam.leap = incremental;

  const DecodeResult result =
      BeamSearch(partial, scorer, vocab, pilot_beam, incremental ? prev : nullptr);
  PilotOutcome out;
  out.reference = ReferenceFromDecode(result, partial, pilot_index);
  out.nfe = result.nfe;
  out.collapse_hits = result.collapse_hits;
  out.collapse_divergences = result.collapse_divergences;
  return out;
}

const PilotRun* PilotTrace::LastCompletedBy(double t) const {
  const PilotRun* last = nullptr;
  for (const PilotRun& run : runs) {
    if (run.end_s <= t + 1e-12) last = &run;
  }
  return last;
}

}  // namespace streamsu
