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

#include "streamsu/sim.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <random>
#include <thread>

#include "streamsu/errors.h"
#include "streamsu/log_math.h"
#include "streamsu/seeding.h"

namespace streamsu {

void CostModel::Validate() const {
  if (attn_eval_s < 0 || ctc_frame_s < 0 || conv_frame_s < 0 || attn_frame2_s < 0 ||
      pilot_overhead_s < 0 || attn_layers < 0) {
    throw InvalidConfig("cost: all costs must be >= 0");
  }
}

void NetworkModel::Validate() const {
  if (rtt_s < 0 || rtt_jitter_s < 0 || upload_s_per_kb < 0 || audio_kb_per_s < 0 ||
      cloud_compute_s < 0 || cloud_jitter_s < 0) {
    throw InvalidConfig("network: all values must be >= 0");
  }
}

void CloudModel::Validate() const {
  if (!(residual_error_rate >= 0.0 && residual_error_rate <= 1.0)) {
    throw InvalidConfig("cloud.residual_error_rate outside [0, 1]");
  }
}

void ScorerConfig::Validate() const {
  if (!(fidelity >= 0.0 && fidelity <= 1.0)) throw InvalidConfig("scorer.fidelity outside [0, 1]");
  if (!(noise_coupling >= 0.0 && noise_coupling <= 1.0)) {
    throw InvalidConfig("scorer.noise_coupling outside [0, 1]");
  }
  if (ngram_order < 1) throw InvalidConfig("scorer.ngram_order must be >= 1");
}

void SimConfig::Validate() const {
  vocab.Validate();
  scorer.Validate();
  beam.Validate();
  pilot.Validate();
  offramp.Validate();
  cost.Validate();
  network.Validate();
  cloud.Validate();
  if (!(lattice.frame_duration > 0.0)) throw InvalidConfig("lattice.frame_duration must be > 0");
  if (!(segment_s > 0.0)) throw InvalidConfig("sim.segment_s must be > 0");
  if (!(pilot_perturbation >= 0.0)) throw InvalidConfig("sim.pilot_perturbation must be >= 0");
  if (num_threads < 0) throw InvalidConfig("sim.num_threads must be >= 0");
  if (lattice_mode == LatticeMode::kEncoder) {
    encoder.Validate();
    if (encoder.dim != vocab.size()) {
      throw InvalidConfig("encoder.dim must equal the vocab size in encoder mode");
    }
  }
}

void SetOptimizations(BeamConfig& beam, bool on) {
  beam.collapse = on;
  beam.early_term = on;
  beam.leap = on;
}

std::string ModeName(OfframpMode mode) {
  switch (mode) {
    case OfframpMode::kPerplexity: return "perplexity";
    case OfframpMode::kNaive: return "naive";
    case OfframpMode::kAlwaysLocal: return "always_local";
    case OfframpMode::kAlwaysOffload: return "always_offload";
  }
  return "unknown";
}

EmissionLattice PerturbLattice(const EmissionLattice& lattice, double sigma, uint64_t seed) {
  if (sigma == 0.0) return lattice;
  EmissionLattice out = lattice;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, sigma);
  for (int t = 0; t < out.num_frames(); ++t) {
    auto row = out.row(t);
    for (double& x : row) {
      if (x != kLogZero) x += normal(rng);
    }
    const double lse = LogSumExp(row);
    for (double& x : row) {
      if (x != kLogZero) x -= lse;
    }
  }
  return out;
}

std::vector<int> CloudTranscript(const std::vector<int>& truth, const Vocab& vocab,
                                 const CloudModel& cloud, uint64_t seed) {
  const std::vector<int> words = vocab.WordIds();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<int> out;
  for (int tok : truth) {
    if (words.size() > 1 && unit(rng) < cloud.residual_error_rate) {
      // Uniform over the other words: draw from size-1 slots, skip tok.
      std::uniform_int_distribution<size_t> pick(0, words.size() - 2);
      int other = words[pick(rng)];
      if (other >= tok) other = words[std::find(words.begin(), words.end(), other) - words.begin() + 1];
      out.push_back(other);
    } else {
      out.push_back(tok);
    }
  }
  return out;
}

std::unique_ptr<AttnScorer> MakeScorer(const SyntheticUtterance& utt, const SimConfig& cfg) {
  const uint64_t seed = DeriveSeed({cfg.scorer.seed, utt.seed});
  if (cfg.scorer.kind == ScorerKind::kNgram) {
    NgramScorerConfig ncfg;
    return std::make_unique<NgramScorer>(cfg.scorer.ngram_order, cfg.vocab, seed, ncfg);
  }
  const double fidelity = std::clamp(
      cfg.scorer.fidelity * (1.0 - cfg.scorer.noise_coupling * utt.noise_level), 0.0, 1.0);
  TeacherScorerConfig tcfg;
  tcfg.frame_duration = cfg.lattice.frame_duration;
  return std::make_unique<TeacherScorer>(utt, fidelity, cfg.vocab, seed, tcfg);
}

namespace {

// Produces the full-input lattice and the lattices pilot runs see.
class LatticeSource {
 public:
  LatticeSource(const SyntheticUtterance& utt, const SimConfig& cfg,
                const EmissionLattice* stored)
      : cfg_(cfg), seed_(utt.seed) {
    EmissionLattice rendered = stored ? *stored : MakeLattice(utt, cfg.vocab, cfg.lattice);
    if (rendered.vocab_size() != cfg.vocab.size()) {
      throw ShapeError("lattice width does not match the vocab");
    }
    if (cfg.lattice_mode == LatticeMode::kTeacher) {
      full_ = std::move(rendered);
      return;
    }
    encoder_ = std::make_unique<LateContextEncoder>(cfg.encoder);
    const Matrix features = FeaturesFromLattice(rendered);
    const int seg_frames = std::max(1, NumFrames(cfg.segment_s, cfg.lattice.frame_duration));
    SegmentCache cache = encoder_->NewCache();
    conv_out_.values.resize(features.rows(), cfg.encoder.dim);
    for (Eigen::Index start = 0; start < features.rows(); start += seg_frames) {
      const Eigen::Index len = std::min<Eigen::Index>(seg_frames, features.rows() - start);
      auto [next, out] = encoder_->EncodeSegment(cache, features.middleRows(start, len));
      conv_out_.values.middleRows(start, len) = out;
      cache = std::move(next);
    }
    full_ = encoder_->ProjectCtc(encoder_->Contextualize(conv_out_), cfg.vocab,
                                 cfg.lattice.frame_duration);
  }

  const EmissionLattice& full() const { return full_; }

  EmissionLattice Pilot(int frames, int pilot_index) const {
    if (encoder_ == nullptr) {
      return PerturbLattice(full_.Prefix(frames), cfg_.pilot_perturbation,
                            DeriveSeed({seed_, 0x9170, static_cast<uint64_t>(pilot_index)}));
    }
    LatentSequence prefix{conv_out_.values.topRows(frames)};
    return encoder_->ProjectCtc(encoder_->Contextualize(prefix), cfg_.vocab,
                                cfg_.lattice.frame_duration);
  }

 private:
  const SimConfig& cfg_;
  uint64_t seed_;
  EmissionLattice full_;
  std::unique_ptr<LateContextEncoder> encoder_;
  LatentSequence conv_out_;
};

struct Job {
  double arrival = 0.0;
  int kind = 0;  // 0: conv segment, 1: pilot trigger
  int index = 0;
  int frames = 0;
};

uint64_t DecisionSeed(uint64_t seed, int id) {
  return DeriveSeed({seed, static_cast<uint64_t>(id), 0xdec1de});
}

template <typename Fn>
void ParallelFor(int n, int threads, Fn fn) {
  if (threads <= 0) threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  threads = std::min(threads, std::max(1, n));
  if (threads == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  std::vector<std::thread> pool;
  for (int w = 0; w < threads; ++w) {
    pool.emplace_back([&] {
      for (int i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mu);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace

UtteranceReport SimulateUtterance(const SyntheticUtterance& utt, const SimConfig& cfg,
                                  uint64_t seed, const EmissionLattice* rendered) {
  cfg.Validate();
  const LatticeSource source(utt, cfg, rendered);
  const EmissionLattice& full = source.full();
  const std::unique_ptr<AttnScorer> scorer = MakeScorer(utt, cfg);
  const double fd = cfg.lattice.frame_duration;
  const int total_frames = full.num_frames();
  const double ingestion_end = full.duration_s();

  UtteranceReport report;
  report.id = utt.id;
  report.duration_s = ingestion_end;
  report.noise_level = utt.noise_level;
  report.num_frames = total_frames;

  // Ingestion: conv segments and pilot triggers share one device worker.
  const std::vector<double> triggers =
      cfg.pilots_enabled ? SchedulePilots(ingestion_end, cfg.pilot) : std::vector<double>{};
  std::vector<Job> jobs;
  const int seg_frames = std::max(1, NumFrames(cfg.segment_s, fd));
  for (int start = 0, k = 0; start < total_frames; start += seg_frames, ++k) {
    const int len = std::min(seg_frames, total_frames - start);
    jobs.push_back({(start + len) * fd, 0, k, len});
  }
  for (size_t j = 0; j < triggers.size(); ++j) {
    jobs.push_back({triggers[j], 1, static_cast<int>(j), 0});
  }
  std::stable_sort(jobs.begin(), jobs.end(), [](const Job& a, const Job& b) {
    if (a.arrival != b.arrival) return a.arrival < b.arrival;
    return a.kind < b.kind;
  });

  double worker_free = 0.0;
  PilotTrace& trace = report.pilots;
  for (const Job& job : jobs) {
    if (job.kind == 0) {
      worker_free = std::max(job.arrival, worker_free) + job.frames * cfg.cost.conv_frame_s;
      continue;
    }
    const double start = std::max(job.arrival, worker_free);
    const size_t j = static_cast<size_t>(job.index);
    const bool superseded = j + 1 < triggers.size() && triggers[j + 1] <= start + 1e-12;
    if (start >= ingestion_end - 1e-9 || superseded) {
      ++trace.skipped_triggers;
      continue;
    }
    const int frames = std::clamp(static_cast<int>(std::floor(start / fd + 1e-9)), 1, total_frames);
    const EmissionLattice partial = source.Pilot(frames, static_cast<int>(trace.runs.size()));
    const PilotReference* prev = trace.runs.empty() ? nullptr : &trace.runs.back().reference;
    PilotOutcome outcome = RunPilot(partial, *scorer, cfg.vocab, cfg.pilot, cfg.beam, prev,
                                    static_cast<int>(trace.runs.size()));
    PilotRun run;
    run.trigger_s = job.arrival;
    run.start_s = start;
    run.partial_len_s = partial.duration_s();
    run.cost_s = cfg.cost.DecodeCost(outcome.nfe) + cfg.cost.EncodeAttentionCost(frames) +
                 cfg.cost.pilot_overhead_s;
    run.end_s = start + run.cost_s;
    run.budget_s = PilotInterval(cfg.pilot, job.index);
    run.over_budget = run.cost_s > run.budget_s;
    run.reference = std::move(outcome.reference);
    run.nfe = outcome.nfe;
    // Still running when ingestion ends: the local decode preempts it.
    run.preempted = run.end_s > ingestion_end + 1e-12;
    trace.infeasible = trace.infeasible || run.over_budget;
    worker_free = run.preempted ? ingestion_end : run.end_s;
    trace.runs.push_back(std::move(run));
  }

  // Offramp: only what has finished by the end of ingestion.
  const PilotRun* basis = trace.LastCompletedBy(ingestion_end);
  std::mt19937_64 decide_rng(DecisionSeed(seed, utt.id));
  report.decision = Decide(basis ? &basis->reference : nullptr, cfg.offramp, ingestion_end,
                           decide_rng);
  report.last_pilot_perplexity =
      basis && !basis->reference.tokens.empty() ? Perplexity(basis->reference)
                                                : std::numeric_limits<double>::quiet_NaN();

  // Local path: drain queued conv segments, finish encoding, decode with
  // the same reference the offramp saw.
  LocalPathReport& local = report.local;
  const double local_start = std::max(ingestion_end, worker_free);
  local.backlog_s = local_start - ingestion_end;
  local.encode_s = cfg.cost.EncodeAttentionCost(total_frames);
  const PilotReference* reference = basis ? &basis->reference : nullptr;
  const DecodeResult decoded = BeamSearch(full, *scorer, cfg.vocab, cfg.beam, reference);
  local.tokens = decoded.Output();
  local.wer = EditDistance(utt.truth, local.tokens);
  local.nfe = decoded.nfe;
  local.decode_s = cfg.cost.DecodeCost(decoded.nfe);
  local.collapse_hits = decoded.collapse_hits;
  local.collapse_divergences = decoded.collapse_divergences;
  local.early_terminated = decoded.early_terminated;
  local.predicted_length = decoded.predicted_length;
  local.leap_extensions = decoded.leap_extensions;
  local.reference_pilot = reference ? reference->pilot_index : -1;

  // Offload path: upload the waveform after ingestion, one RTT, cloud time.
  OffloadPathReport& off = report.offload;
  std::mt19937_64 net_rng(DeriveSeed({seed, static_cast<uint64_t>(utt.id), 0x0ff1}));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  off.upload_s = ingestion_end * cfg.network.audio_kb_per_s * cfg.network.upload_s_per_kb;
  off.rtt_s = cfg.network.rtt_s + unit(net_rng) * cfg.network.rtt_jitter_s;
  off.cloud_s = cfg.network.cloud_compute_s + unit(net_rng) * cfg.network.cloud_jitter_s;
  off.tokens = CloudTranscript(utt.truth, cfg.vocab, cfg.cloud,
                               DeriveSeed({seed, static_cast<uint64_t>(utt.id), 0xc10d}));
  off.wer = EditDistance(utt.truth, off.tokens);
  return report;
}

std::vector<UtteranceReport> SimulateCorpus(const std::vector<SyntheticUtterance>& corpus,
                                            const SimConfig& cfg, uint64_t seed,
                                            const std::vector<EmissionLattice>& rendered) {
  cfg.Validate();
  if (!rendered.empty() && rendered.size() != corpus.size()) {
    throw ShapeError("stored lattices do not match the corpus");
  }
  std::vector<UtteranceReport> reports(corpus.size());
  ParallelFor(static_cast<int>(corpus.size()), cfg.num_threads, [&](int i) {
    reports[i] = SimulateUtterance(corpus[i], cfg, seed, rendered.empty() ? nullptr : &rendered[i]);
  });
  return reports;
}

OffloadDecision Reroute(const UtteranceReport& report, const OfframpConfig& cfg,
                        uint64_t seed) {
  std::mt19937_64 rng(DecisionSeed(seed, report.id));
  const PilotRun* basis = report.pilots.LastCompletedBy(report.duration_s);
  double ppl = std::numeric_limits<double>::quiet_NaN();
  if (basis != nullptr && !basis->reference.tokens.empty()) {
    ppl = Perplexity(basis->reference, cfg.attn_only);
  }
  return DecideFromPerplexity(ppl, basis ? basis->reference.pilot_index : -1, cfg,
                              report.duration_s, rng);
}

AggregateRow Aggregate(const std::vector<UtteranceReport>& reports,
                       const std::vector<OffloadDecision>& decisions,
                       const SweepPoint& point, double tau) {
  AggregateRow row;
  row.mode = ModeName(point.mode);
  row.param = point.value;
  row.tau = tau;
  row.n = static_cast<int>(reports.size());
  std::vector<double> wers, latencies, rtfs, decode;
  int offloaded = 0;
  for (size_t i = 0; i < reports.size(); ++i) {
    const UtteranceReport& r = reports[i];
    const bool off = decisions[i].offload;
    const double latency = off ? r.offload.latency_s() : r.local.latency_s();
    wers.push_back(off ? r.offload.wer.wer() : r.local.wer.wer());
    latencies.push_back(latency);
    rtfs.push_back(latency / r.duration_s);
    decode.push_back(r.local.decode_s);
    if (off) {
      ++offloaded;
    } else {
      row.attn_evals += r.local.nfe.attn_evals;
      row.ctc_frames += r.local.nfe.ctc_frames_scored;
      row.decode_rounds += r.local.nfe.decode_rounds;
    }
    if (r.pilots.infeasible) ++row.infeasible;
  }
  if (!reports.empty()) row.offload_frac = static_cast<double>(offloaded) / reports.size();
  row.mean_wer = Mean(wers);
  row.mean_latency_s = Mean(latencies);
  row.p90_latency_s = Quantile(latencies, 0.9);
  row.mean_rtf = Mean(rtfs);
  row.mean_decode_s = Mean(decode);
  return row;
}

std::vector<AggregateRow> SweepReports(const std::vector<UtteranceReport>& reports,
                                       const std::vector<SweepPoint>& sweep,
                                       const SimConfig& cfg, uint64_t seed) {
  std::vector<AggregateRow> rows;
  for (const SweepPoint& point : sweep) {
    OfframpConfig oc = cfg.offramp;
    oc.mode = point.mode;
    if (point.mode == OfframpMode::kPerplexity) oc.theta = point.value;
    if (point.mode == OfframpMode::kNaive) oc.alpha = point.value;
    std::vector<OffloadDecision> decisions;
    decisions.reserve(reports.size());
    for (const UtteranceReport& r : reports) decisions.push_back(Reroute(r, oc, seed));
    rows.push_back(Aggregate(reports, decisions, point, cfg.pilot.granularity_s));
  }
  return rows;
}

std::vector<AggregateRow> RunExperiment(const std::vector<SyntheticUtterance>& corpus,
                                        const std::vector<SweepPoint>& sweep,
                                        const SimConfig& cfg, uint64_t seed) {
  if (corpus.empty()) throw InvalidConfig("experiment: empty corpus");
  return SweepReports(SimulateCorpus(corpus, cfg, seed), sweep, cfg, seed);
}

}  // namespace streamsu
