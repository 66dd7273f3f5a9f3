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

#include "streamsu/io.h"

#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>

#include "streamsu/config.h"
#include "streamsu/errors.h"
#include "streamsu/log_math.h"
#include "streamsu/metrics.h"

namespace streamsu {

using nlohmann::json;

namespace {

void RequireKeys(const json& j, const std::string& where,
                 std::initializer_list<const char*> required,
                 std::initializer_list<const char*> optional) {
  if (!j.is_object()) throw InvalidConfig(where + ": expected an object");
  for (const char* key : required) {
    if (!j.contains(key)) throw InvalidConfig(where + ": missing key '" + key + "'");
  }
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (const char* k : required) known = known || key == k;
    for (const char* k : optional) known = known || key == k;
    if (!known) throw InvalidConfig(where + ": unknown key '" + key + "'");
  }
}

// -inf has no JSON spelling; store it as null.
json LogProbToJson(double v) { return v == kLogZero ? json(nullptr) : json(v); }

double LogProbFromJson(const json& j) {
  if (j.is_null()) return kLogZero;
  if (!j.is_number()) throw InvalidConfig("corpus: lattice entries must be numbers or null");
  return j.get<double>();
}

json LatticeToJson(const EmissionLattice& lattice) {
  json rows = json::array();
  for (int t = 0; t < lattice.num_frames(); ++t) {
    json row = json::array();
    for (double x : lattice.row(t)) row.push_back(LogProbToJson(x));
    rows.push_back(std::move(row));
  }
  return rows;
}

EmissionLattice LatticeFromJson(const json& j, int vocab_size, double frame_duration) {
  if (!j.is_array()) throw InvalidConfig("corpus: lattice must be an array of rows");
  std::vector<double> values;
  values.reserve(j.size() * vocab_size);
  for (const json& row : j) {
    if (!row.is_array() || static_cast<int>(row.size()) != vocab_size) {
      throw InvalidConfig("corpus: lattice row width must equal the vocab size");
    }
    for (const json& x : row) values.push_back(LogProbFromJson(x));
  }
  return EmissionLattice(static_cast<int>(j.size()), vocab_size, frame_duration,
                         std::move(values));
}

}  // namespace

EmissionLattice Corpus::LatticeFor(size_t i) const {
  if (i < lattices.size()) return lattices[i];
  return MakeLattice(utterances.at(i), vocab, lattice);
}

json CorpusToJson(const Corpus& corpus, bool with_lattices) {
  json utts = json::array();
  for (size_t i = 0; i < corpus.utterances.size(); ++i) {
    const SyntheticUtterance& u = corpus.utterances[i];
    json e = {{"id", u.id},
              {"truth", u.truth},
              {"alignment", u.alignment},
              {"noise_level", u.noise_level},
              {"duration_s", u.duration_s},
              {"seed", u.seed}};
    if (with_lattices) e["lattice"] = LatticeToJson(corpus.LatticeFor(i));
    utts.push_back(std::move(e));
  }
  return json{{"format", kCorpusFormat},
              {"version", kCorpusVersion},
              {"seed", corpus.seed},
              {"vocab",
               {{"tokens", corpus.vocab.tokens},
                {"blank_id", corpus.vocab.blank_id},
                {"sos_id", corpus.vocab.sos_id},
                {"eos_id", corpus.vocab.eos_id}}},
              {"lattice",
               {{"frame_duration", corpus.lattice.frame_duration},
                {"blank_bias", corpus.lattice.blank_bias},
                {"noise_sharpness", corpus.lattice.noise_sharpness},
                {"floor", corpus.lattice.floor}}},
              {"utterances", utts}};
}

Corpus CorpusFromJson(const json& j) {
  RequireKeys(j, "corpus", {"format", "version", "vocab", "lattice", "utterances"},
              {"seed", "config"});
  if (j["format"] != kCorpusFormat) throw InvalidConfig("corpus: unexpected format tag");
  if (j["version"] != kCorpusVersion) throw InvalidConfig("corpus: unsupported version");
  Corpus c;
  try {
    if (j.contains("seed")) c.seed = j["seed"].get<uint64_t>();
    const json& v = j["vocab"];
    RequireKeys(v, "corpus.vocab", {"tokens", "blank_id", "sos_id", "eos_id"}, {});
    c.vocab.tokens = v["tokens"].get<std::vector<std::string>>();
    c.vocab.blank_id = v["blank_id"].get<int>();
    c.vocab.sos_id = v["sos_id"].get<int>();
    c.vocab.eos_id = v["eos_id"].get<int>();
    c.vocab.Validate();

    const json& l = j["lattice"];
    RequireKeys(l, "corpus.lattice", {"frame_duration"}, {"blank_bias", "noise_sharpness", "floor"});
    c.lattice.frame_duration = l["frame_duration"].get<double>();
    if (l.contains("blank_bias")) c.lattice.blank_bias = l["blank_bias"].get<double>();
    if (l.contains("noise_sharpness")) c.lattice.noise_sharpness = l["noise_sharpness"].get<double>();
    if (l.contains("floor")) c.lattice.floor = l["floor"].get<double>();
    if (!(c.lattice.frame_duration > 0.0)) throw InvalidConfig("corpus.lattice.frame_duration must be > 0");

    if (!j["utterances"].is_array()) throw InvalidConfig("corpus.utterances: expected an array");
    bool any_lattice = false, all_lattice = true;
    for (const json& e : j["utterances"]) {
      RequireKeys(e, "corpus.utterances[]",
                  {"id", "truth", "alignment", "noise_level", "duration_s", "seed"}, {"lattice"});
      SyntheticUtterance u;
      u.id = e["id"].get<int>();
      u.truth = e["truth"].get<std::vector<int>>();
      u.alignment = e["alignment"].get<std::vector<int>>();
      u.noise_level = e["noise_level"].get<double>();
      u.duration_s = e["duration_s"].get<double>();
      u.seed = e["seed"].get<uint64_t>();
      ValidateUtterance(u, c.vocab, c.lattice);
      if (e.contains("lattice")) {
        any_lattice = true;
        EmissionLattice lat =
            LatticeFromJson(e["lattice"], c.vocab.size(), c.lattice.frame_duration);
        lat.Validate();
        c.lattices.push_back(std::move(lat));
      } else {
        all_lattice = false;
      }
      c.utterances.push_back(std::move(u));
    }
    if (any_lattice && !all_lattice) {
      throw InvalidConfig("corpus: lattices must be stored for all utterances or none");
    }
  } catch (const json::exception& e) {
    throw InvalidConfig(std::string("corpus: ") + e.what());
  }
  return c;
}

void WriteCorpus(const std::string& path, const Corpus& corpus, bool with_lattices) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path + "'");
  out << CorpusToJson(corpus, with_lattices).dump() << "\n";
  if (!out) throw Error("write failed for '" + path + "'");
}

Corpus ReadCorpus(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidConfig("cannot open corpus '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw InvalidConfig("corpus: malformed JSON in '" + path + "': " + e.what());
  }
  return CorpusFromJson(j);
}

namespace {

json NfeToJson(const NfeReport& nfe) {
  return {{"attn_evals", nfe.attn_evals},
          {"ctc_frames", nfe.ctc_frames_scored},
          {"decode_rounds", nfe.decode_rounds}};
}

json WerToJson(const WerBreakdown& w) {
  return {{"substitutions", w.substitutions},
          {"insertions", w.insertions},
          {"deletions", w.deletions},
          {"ref_len", w.ref_len},
          {"wer", w.wer()}};
}

json NanToNull(double v) { return std::isnan(v) ? json(nullptr) : json(v); }

}  // namespace

json UtteranceRecord(const UtteranceReport& r) {
  json pilots = json::array();
  for (const PilotRun& p : r.pilots.runs) {
    pilots.push_back({{"trigger_s", p.trigger_s},
                      {"start_s", p.start_s},
                      {"end_s", p.end_s},
                      {"partial_len_s", p.partial_len_s},
                      {"cost_s", p.cost_s},
                      {"budget_s", p.budget_s},
                      {"over_budget", p.over_budget},
                      {"preempted", p.preempted},
                      {"tokens", p.reference.tokens},
                      {"nfe", NfeToJson(p.nfe)}});
  }
  return {{"id", r.id},
          {"duration_s", r.duration_s},
          {"noise_level", r.noise_level},
          {"num_frames", r.num_frames},
          {"pilots", pilots},
          {"pilot_infeasible", r.pilots.infeasible},
          {"skipped_triggers", r.pilots.skipped_triggers},
          {"perplexity", NanToNull(r.last_pilot_perplexity)},
          {"decision",
           {{"offload", r.decision.offload},
            {"perplexity", NanToNull(r.decision.perplexity)},
            {"decided_at_s", r.decision.decided_at_s},
            {"basis", r.decision.basis}}},
          {"local",
           {{"tokens", r.local.tokens},
            {"wer", WerToJson(r.local.wer)},
            {"backlog_s", r.local.backlog_s},
            {"encode_s", r.local.encode_s},
            {"decode_s", r.local.decode_s},
            {"latency_s", r.local.latency_s()},
            {"nfe", NfeToJson(r.local.nfe)},
            {"collapse_hits", r.local.collapse_hits},
            {"collapse_divergences", r.local.collapse_divergences},
            {"early_terminated", r.local.early_terminated},
            {"predicted_length", r.local.predicted_length},
            {"leap_extensions", r.local.leap_extensions},
            {"reference_pilot", r.local.reference_pilot}}},
          {"offload",
           {{"tokens", r.offload.tokens},
            {"wer", WerToJson(r.offload.wer)},
            {"upload_s", r.offload.upload_s},
            {"rtt_s", r.offload.rtt_s},
            {"cloud_s", r.offload.cloud_s},
            {"latency_s", r.offload.latency_s()}}},
          {"wer", r.wer()},
          {"latency_s", r.user_latency_s()},
          {"rtf", r.rtf()}};
}

const std::vector<std::string>& AggregateColumns() {
  static const std::vector<std::string> kColumns = {
      "mode",         "param",          "tau",           "n",
      "offload_frac", "mean_wer",       "mean_latency_s", "p90_latency_s",
      "mean_rtf",     "attn_evals",     "ctc_frames",    "decode_rounds",
      "mean_decode_s", "infeasible"};
  return kColumns;
}

std::string FormatDouble(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void WriteAggregateCsv(std::ostream& out, const std::vector<AggregateRow>& rows) {
  const auto& cols = AggregateColumns();
  for (size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << "\n";
  for (const AggregateRow& r : rows) {
    out << r.mode << ',' << FormatDouble(r.param) << ',' << FormatDouble(r.tau) << ',' << r.n
        << ',' << FormatDouble(r.offload_frac) << ',' << FormatDouble(r.mean_wer) << ','
        << FormatDouble(r.mean_latency_s) << ',' << FormatDouble(r.p90_latency_s) << ','
        << FormatDouble(r.mean_rtf) << ',' << r.attn_evals << ',' << r.ctc_frames << ','
        << r.decode_rounds << ',' << FormatDouble(r.mean_decode_s) << ',' << r.infeasible
        << "\n";
  }
}

const std::vector<std::string>& DecodeColumns() {
  static const std::vector<std::string> kColumns = {
      "id",          "noise_level",      "ref_len",         "hyp_len",
      "wer",         "attn_evals",       "ctc_frames",      "decode_rounds",
      "collapse_hits", "collapse_divergences", "early_terminated", "predicted_length",
      "leap_extensions", "reference_pilot", "decode_s"};
  return kColumns;
}

void WriteDecodeCsv(std::ostream& out, const std::vector<UtteranceReport>& reports) {
  const auto& cols = DecodeColumns();
  for (size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << "\n";
  for (const UtteranceReport& r : reports) {
    const LocalPathReport& l = r.local;
    out << r.id << ',' << FormatDouble(r.noise_level) << ',' << l.wer.ref_len << ','
        << l.tokens.size() << ',' << FormatDouble(l.wer.wer()) << ',' << l.nfe.attn_evals << ','
        << l.nfe.ctc_frames_scored << ',' << l.nfe.decode_rounds << ',' << l.collapse_hits << ','
        << l.collapse_divergences << ',' << (l.early_terminated ? 1 : 0) << ','
        << l.predicted_length << ',' << l.leap_extensions << ',' << l.reference_pilot << ','
        << FormatDouble(l.decode_s) << "\n";
  }
}

std::string TokensToString(const std::vector<int>& tokens, const Vocab& vocab) {
  std::string s;
  for (int t : tokens) {
    if (!s.empty()) s += ' ';
    s += (t >= 0 && t < vocab.size()) ? vocab.tokens[t] : "<unk>";
  }
  return s;
}

}  // namespace streamsu
