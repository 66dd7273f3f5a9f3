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

#ifndef STREAMSU_OFFRAMP_H_
#define STREAMSU_OFFRAMP_H_

#include <limits>
#include <random>

#include "streamsu/beam.h"

namespace streamsu {

enum class OfframpMode { kPerplexity, kNaive, kAlwaysLocal, kAlwaysOffload };

struct OfframpConfig {
  OfframpMode mode = OfframpMode::kPerplexity;
  double theta = 2.0;  // offload when perplexity > theta
  double alpha = 0.5;  // naive: probability of running locally
  // Use attention-only token probabilities instead of the combined ones.
  bool attn_only = false;
  // Path taken when no pilot reference exists.
  bool offload_without_reference = true;

  // Throws InvalidConfig.
  void Validate() const;
};

struct OffloadDecision {
  bool offload = false;
  double perplexity = std::numeric_limits<double>::quiet_NaN();  // NaN if unknown
  double decided_at_s = 0.0;
  int basis = -1;  // pilot_index of the reference used, -1 if none
};

// exp(-mean per-token log prob). Throws NoReference for an empty reference.
double Perplexity(const PilotReference& ref, bool attn_only = false);

// Decision from an already computed perplexity (NaN when no reference
// exists). `basis` is recorded as-is.
OffloadDecision DecideFromPerplexity(double perplexity, int basis,
                                     const OfframpConfig& cfg,
                                     double ingestion_end_s, std::mt19937_64& rng);

// Routes one input at the end of ingestion. Only the last pilot reference
// is consulted; the naive mode draws from `rng`.
OffloadDecision Decide(const PilotReference* ref, const OfframpConfig& cfg,
                       double ingestion_end_s, std::mt19937_64& rng);

}  // namespace streamsu

#endif  // STREAMSU_OFFRAMP_H_
