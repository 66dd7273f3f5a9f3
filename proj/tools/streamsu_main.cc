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

// streamsu: corpus generation, decoding, pipeline simulation and sweeps.
//
// Exit codes: 0 ok, 2 configuration or usage error, 3 runtime error.

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "streamsu/config.h"
#include "streamsu/encoder.h"
#include "streamsu/errors.h"
#include "streamsu/io.h"
#include "streamsu/sim.h"

namespace {

using nlohmann::json;
using namespace streamsu;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

struct CommonFlags {
  std::string config_path;
  std::optional<uint64_t> seed;
  std::string out;
  std::string corpus;
  std::optional<int> n;
  std::optional<int> threads;
  bool collapse = false;
  bool early_term = false;
  bool leap = false;
  bool all_opts = false;
  bool no_pilots = false;
  std::vector<double> theta;
  std::vector<double> alpha;
  std::vector<double> tau;
  std::string log;
  bool lattices = false;
};

RunConfig ResolveConfig(const CommonFlags& f) {
  RunConfig cfg;
  if (!f.config_path.empty()) cfg = LoadRunConfig(f.config_path);
  if (f.seed) cfg.seed = *f.seed;
  if (f.n) cfg.corpus_n = *f.n;
  if (f.threads) cfg.sim.num_threads = *f.threads;
  if (f.lattices) cfg.write_lattices = true;
  BeamConfig& beam = cfg.sim.beam;
  if (f.all_opts) SetOptimizations(beam, true);
  if (f.collapse) beam.collapse = true;
  if (f.early_term) beam.early_term = true;
  if (f.leap) beam.leap = true;
  if (f.no_pilots) cfg.sim.pilots_enabled = false;
  cfg.Validate();
  return cfg;
}

// Loads --corpus, or generates one from the config. The corpus vocab and
// lattice settings take precedence over the config's.
Corpus LoadOrGenerate(const CommonFlags& f, RunConfig& cfg) {
  Corpus corpus;
  if (!f.corpus.empty()) {
    corpus = ReadCorpus(f.corpus);
    cfg.sim.vocab = corpus.vocab;
    cfg.sim.lattice = corpus.lattice;
    cfg.corpus_n = static_cast<int>(corpus.utterances.size());
    cfg.Validate();
    return corpus;
  }
  corpus.seed = cfg.seed;
  corpus.vocab = cfg.sim.vocab;
  corpus.lattice = cfg.sim.lattice;
  corpus.utterances =
      GenCorpus(cfg.corpus_n, cfg.mix, cfg.seed, cfg.sim.vocab, cfg.sim.corpus, cfg.sim.lattice);
  return corpus;
}

void Emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path + "'");
  out << text;
  if (!out) throw Error("write failed for '" + path + "'");
}

void CsvHeader(std::ostream& out, const std::string& command, const RunConfig& cfg,
               const std::string& corpus) {
  out << "# streamsu " << command << "\n";
  out << "# seed=" << cfg.seed << "\n";
  if (!corpus.empty()) out << "# corpus=" << corpus << "\n";
  out << "# config=" << ToJson(cfg).dump() << "\n";
}

std::string RunLog(const std::string& command, const RunConfig& cfg,
                   const std::vector<UtteranceReport>& reports) {
  std::ostringstream out;
  out << json{{"type", "header"}, {"command", command}, {"config", ToJson(cfg)}}.dump() << "\n";
  for (const UtteranceReport& r : reports) {
    json rec = UtteranceRecord(r);
    rec["type"] = "utterance";
    out << rec.dump() << "\n";
  }
  return out.str();
}

int CmdGen(const CommonFlags& f) {
  RunConfig cfg = ResolveConfig(f);
  Corpus corpus;
  corpus.seed = cfg.seed;
  corpus.vocab = cfg.sim.vocab;
  corpus.lattice = cfg.sim.lattice;
  corpus.utterances =
      GenCorpus(cfg.corpus_n, cfg.mix, cfg.seed, cfg.sim.vocab, cfg.sim.corpus, cfg.sim.lattice);
  json j = CorpusToJson(corpus, cfg.write_lattices);
  j["config"] = ToJson(cfg);
  Emit(f.out, j.dump() + "\n");
  return kExitOk;
}

std::vector<UtteranceReport> Simulate(const Corpus& corpus,
                                      const RunConfig& cfg) {
  return SimulateCorpus(corpus.utterances, cfg.sim, cfg.seed, corpus.lattices);
}

int CmdDecode(const CommonFlags& f) {
  RunConfig cfg = ResolveConfig(f);
  const Corpus corpus = LoadOrGenerate(f, cfg);
  cfg.sim.offramp.mode = OfframpMode::kAlwaysLocal;
  const std::vector<UtteranceReport> reports = Simulate(corpus, cfg);
  std::ostringstream out;
  CsvHeader(out, "decode", cfg, f.corpus);
  WriteDecodeCsv(out, reports);
  Emit(f.out, out.str());
  if (!f.log.empty()) Emit(f.log, RunLog("decode", cfg, reports));
  return kExitOk;
}

int CmdSimulate(const CommonFlags& f) {
  RunConfig cfg = ResolveConfig(f);
  if (f.theta.size() > 1 || f.alpha.size() > 1 || f.tau.size() > 1) {
    throw InvalidConfig("simulate takes single --theta/--alpha/--tau values; use sweep");
  }
  if (!f.theta.empty()) cfg.sim.offramp.theta = f.theta[0];
  if (!f.alpha.empty()) cfg.sim.offramp.alpha = f.alpha[0];
  if (!f.tau.empty()) cfg.sim.pilot.granularity_s = f.tau[0];
  cfg.Validate();
  const Corpus corpus = LoadOrGenerate(f, cfg);
  const std::vector<UtteranceReport> reports = Simulate(corpus, cfg);
  std::vector<OffloadDecision> decisions;
  for (const UtteranceReport& r : reports) decisions.push_back(r.decision);
  SweepPoint point{cfg.sim.offramp.mode, cfg.sim.offramp.mode == OfframpMode::kNaive
                                             ? cfg.sim.offramp.alpha
                                             : cfg.sim.offramp.theta};
  std::ostringstream out;
  CsvHeader(out, "simulate", cfg, f.corpus);
  WriteAggregateCsv(out, {Aggregate(reports, decisions, point, cfg.sim.pilot.granularity_s)});
  Emit(f.out, out.str());
  if (!f.log.empty()) Emit(f.log, RunLog("simulate", cfg, reports));
  return kExitOk;
}

int CmdSweep(const CommonFlags& f) {
  RunConfig cfg = ResolveConfig(f);
  const Corpus corpus = LoadOrGenerate(f, cfg);
  std::vector<SweepPoint> sweep = {{OfframpMode::kAlwaysLocal, 0.0},
                                   {OfframpMode::kAlwaysOffload, 0.0}};
  for (double theta : f.theta) sweep.push_back({OfframpMode::kPerplexity, theta});
  for (double alpha : f.alpha) sweep.push_back({OfframpMode::kNaive, alpha});
  for (const SweepPoint& p : sweep) {
    OfframpConfig oc = cfg.sim.offramp;
    oc.mode = p.mode;
    if (p.mode == OfframpMode::kPerplexity) oc.theta = p.value;
    if (p.mode == OfframpMode::kNaive) oc.alpha = p.value;
    oc.Validate();
  }
  std::vector<double> taus = f.tau;
  if (taus.empty()) taus.push_back(cfg.sim.pilot.granularity_s);

  std::vector<AggregateRow> rows;
  for (double tau : taus) {
    RunConfig run = cfg;
    run.sim.pilot.granularity_s = tau;
    run.Validate();
    const std::vector<UtteranceReport> reports = Simulate(corpus, run);
    for (AggregateRow& row : SweepReports(reports, sweep, run.sim, run.seed)) {
      rows.push_back(std::move(row));
    }
  }
  std::ostringstream out;
  CsvHeader(out, "sweep", cfg, f.corpus);
  WriteAggregateCsv(out, rows);
  Emit(f.out, out.str());
  return kExitOk;
}

int CmdFlops(const CommonFlags& f) {
  RunConfig cfg = ResolveConfig(f);
  const Corpus corpus = LoadOrGenerate(f, cfg);
  std::ostringstream out;
  CsvHeader(out, "flops", cfg, f.corpus);
  out << "id,frames,conv_layers,attn_layers,streaming_flops,non_streaming_flops,"
         "streaming_fraction\n";
  const EncoderConfig& enc = cfg.sim.encoder;
  for (const SyntheticUtterance& u : corpus.utterances) {
    const int frames = NumFrames(u.duration_s, corpus.lattice.frame_duration);
    const FlopsReport r = EncoderFlops(enc, frames, corpus.vocab.size());
    out << u.id << ',' << frames << ',' << enc.conv_layers << ',' << enc.attn_layers << ','
        << FormatDouble(r.streaming) << ',' << FormatDouble(r.non_streaming) << ','
        << FormatDouble(r.streaming_fraction()) << "\n";
  }
  Emit(f.out, out.str());
  return kExitOk;
}

void AddCommon(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config_path, "JSON config file")->check(CLI::ExistingFile);
  cmd->add_option("--seed", f.seed, "Master seed (overrides config)");
  cmd->add_option("--out", f.out, "Output path; stdout if omitted");
  cmd->add_option("--threads", f.threads, "Worker threads; 0 uses all cores");
}

void AddCorpusInput(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--corpus", f.corpus, "Corpus JSON; generated from the config if omitted");
  cmd->add_option("--n", f.n, "Utterances to generate when no corpus is given");
}

void AddToggles(CLI::App* cmd, CommonFlags& f) {
  cmd->add_flag("--collapse", f.collapse, "Beam collapse against the pilot reference");
  cmd->add_flag("--early-term", f.early_term, "Early termination at the predicted length");
  cmd->add_flag("--leap", f.leap, "Reuse cached CTC rows from the pilot");
  cmd->add_flag("--all-opts", f.all_opts, "All three optimizations");
  cmd->add_flag("--no-pilots", f.no_pilots, "Disable pilot inference");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"streamsu: streaming speech-understanding decoder and simulator"};
  app.require_subcommand(1);
  CommonFlags f;

  CLI::App* gen = app.add_subcommand("gen", "Generate a synthetic corpus");
  AddCommon(gen, f);
  gen->add_option("--n", f.n, "Number of utterances");
  gen->add_flag("--lattices", f.lattices, "Store pre-rendered lattices");

  CLI::App* decode = app.add_subcommand("decode", "Decode every utterance locally");
  AddCommon(decode, f);
  AddCorpusInput(decode, f);
  AddToggles(decode, f);
  decode->add_option("--log", f.log, "Per-utterance JSON-lines log");

  CLI::App* simulate = app.add_subcommand("simulate", "Simulate the full pipeline");
  AddCommon(simulate, f);
  AddCorpusInput(simulate, f);
  AddToggles(simulate, f);
  simulate->add_option("--theta", f.theta, "Perplexity threshold");
  simulate->add_option("--alpha", f.alpha, "Naive local probability");
  simulate->add_option("--tau", f.tau, "Pilot granularity in seconds");
  simulate->add_option("--log", f.log, "Per-utterance JSON-lines log");

  CLI::App* sweep = app.add_subcommand("sweep", "Offramp frontier over theta, alpha and tau");
  AddCommon(sweep, f);
  AddCorpusInput(sweep, f);
  AddToggles(sweep, f);
  sweep->add_option("--theta", f.theta, "Perplexity thresholds")->delimiter(',');
  sweep->add_option("--alpha", f.alpha, "Naive local probabilities")->delimiter(',');
  sweep->add_option("--tau", f.tau, "Pilot granularities in seconds")->delimiter(',');

  CLI::App* flops = app.add_subcommand("flops", "Streaming and non-streaming encoder FLOPs");
  AddCommon(flops, f);
  AddCorpusInput(flops, f);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (*gen) return CmdGen(f);
    if (*decode) return CmdDecode(f);
    if (*simulate) return CmdSimulate(f);
    if (*sweep) return CmdSweep(f);
    if (*flops) return CmdFlops(f);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitConfig;
}
