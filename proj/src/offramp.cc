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

#include "streamsu/offramp.h"

#include <cmath>

#include "streamsu/errors.h"

namespace streamsu {

void OfframpConfig::Validate() const {
  if (!(theta > 0.0)) throw InvalidConfig("offramp.theta must be > 0");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw InvalidConfig("offramp.alpha outside [0, 1]");
}

double Perplexity(const PilotReference& ref, bool attn_only) {
  const std::vector<double>& logps = attn_only ? ref.attn_token_logp : ref.token_logp;
  if (ref.tokens.empty() || logps.empty()) {
    throw NoReference("perplexity: reference has no tokens");
  }
  double sum = 0.0;
  for (double lp : logps) sum += lp;
  return std::exp(-sum / static_cast<double>(logps.size()));
}

OffloadDecision DecideFromPerplexity(double perplexity, int basis,
                                     const OfframpConfig& cfg,
                                     double ingestion_end_s, std::mt19937_64& rng) {
  cfg.Validate();
  OffloadDecision d;
  d.decided_at_s = ingestion_end_s;
  d.basis = basis;
  d.perplexity = perplexity;
  switch (cfg.mode) {
    case OfframpMode::kAlwaysLocal:
      d.offload = false;
      break;
    case OfframpMode::kAlwaysOffload:
      d.offload = true;
      break;
    case OfframpMode::kNaive: {
      std::uniform_real_distribution<double> unit(0.0, 1.0);
      d.offload = unit(rng) >= cfg.alpha;
      break;
    }
    case OfframpMode::kPerplexity:
      d.offload = std::isnan(perplexity) ? cfg.offload_without_reference
                                         : perplexity > cfg.theta;
      break;
  }
  return d;
}

OffloadDecision Decide(const PilotReference* ref, const OfframpConfig& cfg,
                       double ingestion_end_s, std::mt19937_64& rng) {
  double ppl = std::numeric_limits<double>::quiet_NaN();
  int basis = -1;
  if (ref != nullptr) {
    basis = ref->pilot_index;
    if (!ref->tokens.empty()) ppl = Perplexity(*ref, cfg.attn_only);
  }
  return DecideFromPerplexity(ppl, basis, cfg, ingestion_end_s, rng);
}

}  // namespace streamsu
