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

#ifndef STREAMSU_PILOT_H_
#define STREAMSU_PILOT_H_

#include <optional>
#include <vector>

#include "streamsu/beam.h"
#include "streamsu/lattice.h"
#include "streamsu/scorer.h"

namespace streamsu {

enum class TokenLimitMode { kAbsolute, kRatio };

struct PilotConfig {
  double granularity_s = 1.0;  // delta t between pilot triggers
  double min_partial_s = 1.5;  // no pilot on shorter inputs
  // Each successive interval is multiplied by this; 1 keeps delta t fixed.
  double granularity_growth = 1.0;
  int beam_width = 3;
  TokenLimitMode token_limit_mode = TokenLimitMode::kAbsolute;
  int token_limit = 15;
  // kRatio: limit = ceil(token_limit_ratio * avg_full_len).
  double token_limit_ratio = 0.7;
  double avg_full_len = 11.0;
  // Feed the previous pilot's reference into the next pilot run.
  bool incremental = true;

  int EffectiveTokenLimit() const;
  // Throws InvalidConfig.
  void Validate() const;
};

// Trigger times (seconds since ingestion start), strictly before
// `duration_s`.
std::vector<double> SchedulePilots(double duration_s, const PilotConfig& cfg);

// Nominal interval that follows the pilot triggered at index `i`.
double PilotInterval(const PilotConfig& cfg, int i);

struct PilotOutcome {
  PilotReference reference;
  NfeReport nfe;
  int collapse_hits = 0;
  int collapse_divergences = 0;
};

// Narrow-beam decode of a partial lattice. `beam` supplies lambda, the end
// detection margin and the leap factor; width and token cap come from
// `cfg`. With `prev` (and cfg.incremental) the run uses collapse, early
// termination and CTC leap against it.
PilotOutcome RunPilot(const EmissionLattice& partial, const AttnScorer& scorer,
                      const Vocab& vocab, const PilotConfig& cfg,
                      const BeamConfig& beam, const PilotReference* prev,
                      int pilot_index);

// Reference view of a finished decode.
PilotReference ReferenceFromDecode(const DecodeResult& result,
                                   const EmissionLattice& lattice, int pilot_index);

struct PilotRun {
  double trigger_s = 0.0;
  double start_s = 0.0;
  double end_s = 0.0;
  double partial_len_s = 0.0;
  double cost_s = 0.0;
  double budget_s = 0.0;  // nominal interval the run should fit in
  bool over_budget = false;
  // Unfinished at the end of ingestion; its reference is never used.
  bool preempted = false;
  PilotReference reference;
  NfeReport nfe;
};

struct PilotTrace {
  std::vector<PilotRun> runs;
  // Set when any run overran its interval.
  bool infeasible = false;
  int skipped_triggers = 0;

  // Last run finished by `t`, if any.
  const PilotRun* LastCompletedBy(double t) const;
};

}  // namespace streamsu

#endif  // STREAMSU_PILOT_H_
