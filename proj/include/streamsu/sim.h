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

#ifndef STREAMSU_SIM_H_
#define STREAMSU_SIM_H_

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "streamsu/beam.h"
#include "streamsu/encoder.h"
#include "streamsu/lattice.h"
#include "streamsu/metrics.h"
#include "streamsu/offramp.h"
#include "streamsu/pilot.h"
#include "streamsu/scorer.h"

namespace streamsu {

// Device speed, in simulated seconds per unit of work.
struct CostModel {
  double attn_eval_s = 0.005;     // one decoder step for one hypothesis
  double ctc_frame_s = 1e-6;      // one (candidate, frame) cell of the CTC recursion
  double conv_frame_s = 5e-4;     // conv stack, per input frame
  double attn_frame2_s = 1e-6;    // one attention layer, per frame^2
  int attn_layers = 3;
  double pilot_overhead_s = 0.0;  // fixed cost per pilot run

  double EncodeAttentionCost(int frames) const {
    return attn_layers * attn_frame2_s * static_cast<double>(frames) * frames;
  }
  double DecodeCost(const NfeReport& nfe) const {
    return attn_eval_s * static_cast<double>(nfe.attn_evals) +
           ctc_frame_s * static_cast<double>(nfe.ctc_frames_scored);
  }
  void Validate() const;
};

struct NetworkModel {
  double rtt_s = 0.08;
  double rtt_jitter_s = 0.04;  // uniform extra in [0, jitter)
  double upload_s_per_kb = 0.002;
  double audio_kb_per_s = 32.0;
  double cloud_compute_s = 0.25;
  double cloud_jitter_s = 0.1;
  void Validate() const;
};

struct CloudModel {
  // Per-token substitution probability of the cloud transcript.
  double residual_error_rate = 0.02;
  void Validate() const;
};

enum class ScorerKind { kTeacher, kNgram };

struct ScorerConfig {
  ScorerKind kind = ScorerKind::kTeacher;
  double fidelity = 0.9;
  // Effective fidelity = fidelity * (1 - noise_coupling * noise_level).
  double noise_coupling = 0.0;
  int ngram_order = 3;
  uint64_t seed = 11;
  void Validate() const;
};

enum class LatticeMode { kTeacher, kEncoder };

struct SimConfig {
  Vocab vocab = Vocab::Default();
  LatticeConfig lattice;
  CorpusConfig corpus;
  ScorerConfig scorer;
  BeamConfig beam;  // full decode; the pilot inherits lambda, margin, q
  PilotConfig pilot;
  bool pilots_enabled = true;
  OfframpConfig offramp;
  CostModel cost;
  NetworkModel network;
  CloudModel cloud;
  LatticeMode lattice_mode = LatticeMode::kTeacher;
  EncoderConfig encoder;
  // Teacher mode: std-dev of log-domain noise added to pilot lattices,
  // standing in for the prefix/full contextualization gap.
  double pilot_perturbation = 0.05;
  double segment_s = 0.2;  // ingestion segment length
  int num_threads = 0;     // 0: hardware concurrency

  // Throws InvalidConfig.
  void Validate() const;
};

// Enables or disables collapse, early termination and leap together.
void SetOptimizations(BeamConfig& beam, bool on);

struct LocalPathReport {
  std::vector<int> tokens;
  WerBreakdown wer;
  double backlog_s = 0.0;  // conv segments still queued at ingestion end
  double encode_s = 0.0;   // full-context attention layers
  double decode_s = 0.0;
  NfeReport nfe;
  int collapse_hits = 0;
  int collapse_divergences = 0;
  bool early_terminated = false;
  int predicted_length = -1;
  int leap_extensions = 0;
  int reference_pilot = -1;

  double latency_s() const { return backlog_s + encode_s + decode_s; }
};

struct OffloadPathReport {
  std::vector<int> tokens;
  WerBreakdown wer;
  double upload_s = 0.0;
  double rtt_s = 0.0;
  double cloud_s = 0.0;

  double latency_s() const { return upload_s + rtt_s + cloud_s; }
};

struct UtteranceReport {
  int id = 0;
  double duration_s = 0.0;
  double noise_level = 0.0;
  int num_frames = 0;
  PilotTrace pilots;
  // Perplexity of the reference available at ingestion end, NaN if none.
  double last_pilot_perplexity = 0.0;
  OffloadDecision decision;
  LocalPathReport local;
  OffloadPathReport offload;

  const std::vector<int>& output() const {
    return decision.offload ? offload.tokens : local.tokens;
  }
  double wer() const { return decision.offload ? offload.wer.wer() : local.wer.wer(); }
  double user_latency_s() const {
    return decision.offload ? offload.latency_s() : local.latency_s();
  }
  double rtf() const { return user_latency_s() / duration_s; }
};

// Runs one utterance through ingestion, pilots, the offramp, and both
// execution paths; `decision` picks which path the user observes.
// `rendered`, if given, replaces the lattice rendered from `utt`.
UtteranceReport SimulateUtterance(const SyntheticUtterance& utt, const SimConfig& cfg,
                                  uint64_t seed, const EmissionLattice* rendered = nullptr);

// Same for a corpus, in utterance order regardless of thread count.
// `rendered` is empty or parallel to `corpus`.
std::vector<UtteranceReport> SimulateCorpus(const std::vector<SyntheticUtterance>& corpus,
                                            const SimConfig& cfg, uint64_t seed,
                                            const std::vector<EmissionLattice>& rendered = {});

// Re-routes a simulated utterance under another offramp setting.
OffloadDecision Reroute(const UtteranceReport& report, const OfframpConfig& cfg,
                        uint64_t seed);

struct SweepPoint {
  OfframpMode mode = OfframpMode::kPerplexity;
  double value = 0.0;  // theta or alpha; unused for the always_* modes
};

std::string ModeName(OfframpMode mode);

struct AggregateRow {
  std::string mode;
  double param = 0.0;
  double tau = 0.0;
  int n = 0;
  double offload_frac = 0.0;
  double mean_wer = 0.0;
  double mean_latency_s = 0.0;
  double p90_latency_s = 0.0;
  double mean_rtf = 0.0;
  // Summed over locally executed utterances.
  int64_t attn_evals = 0;
  int64_t ctc_frames = 0;
  int64_t decode_rounds = 0;
  // Mean full-decode cost over all utterances, whatever their route.
  double mean_decode_s = 0.0;
  int infeasible = 0;
};

AggregateRow Aggregate(const std::vector<UtteranceReport>& reports,
                       const std::vector<OffloadDecision>& decisions,
                       const SweepPoint& point, double tau);

// One aggregate row per sweep point, for one simulated corpus.
std::vector<AggregateRow> RunExperiment(const std::vector<SyntheticUtterance>& corpus,
                                        const std::vector<SweepPoint>& sweep,
                                        const SimConfig& cfg, uint64_t seed);

// Same rows computed from reports already simulated with `cfg`.
std::vector<AggregateRow> SweepReports(const std::vector<UtteranceReport>& reports,
                                       const std::vector<SweepPoint>& sweep,
                                       const SimConfig& cfg, uint64_t seed);

// Building blocks exposed for tests.
EmissionLattice PerturbLattice(const EmissionLattice& lattice, double sigma, uint64_t seed);
std::vector<int> CloudTranscript(const std::vector<int>& truth, const Vocab& vocab,
                                 const CloudModel& cloud, uint64_t seed);
std::unique_ptr<AttnScorer> MakeScorer(const SyntheticUtterance& utt, const SimConfig& cfg);

}  // namespace streamsu

#endif  // STREAMSU_SIM_H_
