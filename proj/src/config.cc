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

#include "streamsu/config.h"

#include <cmath>
#include <fstream>
#include <limits>
#include <set>

#include "streamsu/errors.h"

namespace streamsu {

using nlohmann::json;

double ParseDouble(const json& j, const std::string& field) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "inf" || s == "+inf" || s == "Infinity") return std::numeric_limits<double>::infinity();
    if (s == "-inf" || s == "-Infinity") return -std::numeric_limits<double>::infinity();
  }
  throw InvalidConfig(field + ": expected a number");
}

json DoubleToJson(double v) {
  if (std::isinf(v)) return v > 0 ? json("inf") : json("-inf");
  return v;
}

namespace {

// Reads fields out of one JSON object and rejects anything left over.
class Section {
 public:
  Section(const json& j, std::string name) : j_(j), name_(std::move(name)) {
    if (!j_.is_object()) throw InvalidConfig(name_ + ": expected an object");
  }

  bool Has(const std::string& key) const { return j_.contains(key); }

  const json& Raw(const std::string& key) {
    seen_.insert(key);
    return j_.at(key);
  }

  void Get(const std::string& key, double& out) {
    if (Has(key)) out = ParseDouble(Raw(key), Field(key));
  }
  void Get(const std::string& key, int& out) {
    if (!Has(key)) return;
    const json& v = Raw(key);
    if (!v.is_number_integer()) throw InvalidConfig(Field(key) + ": expected an integer");
    out = v.get<int>();
  }
  void Get(const std::string& key, uint64_t& out) {
    if (!Has(key)) return;
    const json& v = Raw(key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<int64_t>() >= 0)) {
      throw InvalidConfig(Field(key) + ": expected a nonnegative integer");
    }
    out = v.get<uint64_t>();
  }
  void Get(const std::string& key, bool& out) {
    if (!Has(key)) return;
    const json& v = Raw(key);
    if (!v.is_boolean()) throw InvalidConfig(Field(key) + ": expected a boolean");
    out = v.get<bool>();
  }
  void Get(const std::string& key, std::string& out) {
    if (!Has(key)) return;
    const json& v = Raw(key);
    if (!v.is_string()) throw InvalidConfig(Field(key) + ": expected a string");
    out = v.get<std::string>();
  }

  std::string Field(const std::string& key) const {
    return name_.empty() ? key : name_ + "." + key;
  }

  void Finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.count(key)) throw InvalidConfig("unknown config key '" + Field(key) + "'");
    }
  }

 private:
  const json& j_;
  std::string name_;
  std::set<std::string> seen_;
};

template <typename Enum>
Enum ParseEnum(const std::string& field, const std::string& value,
               std::initializer_list<std::pair<const char*, Enum>> options) {
  for (const auto& [name, e] : options) {
    if (value == name) return e;
  }
  throw InvalidConfig(field + ": unknown value '" + value + "'");
}

void ParseVocab(const json& j, Vocab& vocab) {
  Section s(j, "vocab");
  if (s.Has("num_words")) {
    int words = 0;
    s.Get("num_words", words);
    if (words < 1) throw InvalidConfig("vocab.num_words must be >= 1");
    vocab = Vocab::Default(words);
  }
  if (s.Has("tokens")) {
    const json& t = s.Raw("tokens");
    if (!t.is_array()) throw InvalidConfig("vocab.tokens: expected an array");
    vocab.tokens.clear();
    for (const json& tok : t) {
      if (!tok.is_string()) throw InvalidConfig("vocab.tokens: expected strings");
      vocab.tokens.push_back(tok.get<std::string>());
    }
  }
  s.Get("blank_id", vocab.blank_id);
  s.Get("sos_id", vocab.sos_id);
  s.Get("eos_id", vocab.eos_id);
  s.Finish();
}

void ParseMix(const json& j, DifficultyMix& mix) {
  if (!j.is_array()) throw InvalidConfig("corpus.mix: expected an array of [noise, fraction]");
  mix.clear();
  for (const json& e : j) {
    if (!e.is_array() || e.size() != 2) {
      throw InvalidConfig("corpus.mix: expected [noise, fraction] pairs");
    }
    mix.emplace_back(ParseDouble(e[0], "corpus.mix"), ParseDouble(e[1], "corpus.mix"));
  }
}

}  // namespace

void RunConfig::Validate() const {
  sim.Validate();
  if (corpus_n < 0) throw InvalidConfig("corpus.n must be >= 0");
  if (mix.empty()) throw InvalidConfig("corpus.mix: empty difficulty mix");
  double total = 0.0;
  for (const auto& [noise, frac] : mix) {
    if (!(noise >= 0.0 && noise <= 1.0)) throw InvalidConfig("corpus.mix: noise outside [0, 1]");
    if (frac < 0.0) throw InvalidConfig("corpus.mix: negative fraction");
    total += frac;
  }
  if (std::abs(total - 1.0) > 1e-9) throw InvalidConfig("corpus.mix: fractions must sum to 1");
}

RunConfig ParseRunConfig(const json& j, RunConfig cfg) {
  Section root(j, "");
  root.Get("seed", cfg.seed);
  SimConfig& sim = cfg.sim;

  if (root.Has("vocab")) ParseVocab(root.Raw("vocab"), sim.vocab);
  if (root.Has("lattice")) {
    Section s(root.Raw("lattice"), "lattice");
    s.Get("frame_duration", sim.lattice.frame_duration);
    s.Get("blank_bias", sim.lattice.blank_bias);
    s.Get("noise_sharpness", sim.lattice.noise_sharpness);
    s.Get("floor", sim.lattice.floor);
    s.Finish();
  }
  if (root.Has("corpus")) {
    Section s(root.Raw("corpus"), "corpus");
    s.Get("n", cfg.corpus_n);
    if (s.Has("mix")) ParseMix(s.Raw("mix"), cfg.mix);
    s.Get("min_duration_s", sim.corpus.min_duration_s);
    s.Get("max_duration_s", sim.corpus.max_duration_s);
    s.Get("tokens_per_second", sim.corpus.tokens_per_second);
    s.Get("lead_silence_s", sim.corpus.lead_silence_s);
    s.Get("trail_silence_s", sim.corpus.trail_silence_s);
    s.Get("max_tokens", sim.corpus.max_tokens);
    s.Get("write_lattices", cfg.write_lattices);
    s.Finish();
  }
  if (root.Has("scorer")) {
    Section s(root.Raw("scorer"), "scorer");
    std::string kind;
    s.Get("kind", kind);
    if (!kind.empty()) {
      sim.scorer.kind = ParseEnum<ScorerKind>(
          "scorer.kind", kind, {{"teacher", ScorerKind::kTeacher}, {"ngram", ScorerKind::kNgram}});
    }
    s.Get("fidelity", sim.scorer.fidelity);
    s.Get("noise_coupling", sim.scorer.noise_coupling);
    s.Get("ngram_order", sim.scorer.ngram_order);
    s.Get("seed", sim.scorer.seed);
    s.Finish();
  }
  if (root.Has("beam")) {
    Section s(root.Raw("beam"), "beam");
    s.Get("beam_width", sim.beam.beam_width);
    s.Get("lambda", sim.beam.lambda);
    s.Get("max_tokens", sim.beam.max_tokens);
    s.Get("end_detect_margin", sim.beam.end_detect_margin);
    s.Get("collapse", sim.beam.collapse);
    s.Get("early_term", sim.beam.early_term);
    s.Get("early_term_c", sim.beam.early_term_c);
    s.Get("leap", sim.beam.leap);
    s.Get("leap_q", sim.beam.leap_q);
    s.Finish();
  }
  if (root.Has("pilot")) {
    Section s(root.Raw("pilot"), "pilot");
    PilotConfig& p = sim.pilot;
    s.Get("enabled", sim.pilots_enabled);
    s.Get("granularity_s", p.granularity_s);
    s.Get("min_partial_s", p.min_partial_s);
    s.Get("granularity_growth", p.granularity_growth);
    s.Get("beam_width", p.beam_width);
    std::string mode;
    s.Get("token_limit_mode", mode);
    if (!mode.empty()) {
      p.token_limit_mode = ParseEnum<TokenLimitMode>(
          "pilot.token_limit_mode", mode,
          {{"absolute", TokenLimitMode::kAbsolute}, {"ratio", TokenLimitMode::kRatio}});
    }
    s.Get("token_limit", p.token_limit);
    s.Get("token_limit_ratio", p.token_limit_ratio);
    s.Get("avg_full_len", p.avg_full_len);
    s.Get("incremental", p.incremental);
    s.Finish();
  }
  if (root.Has("offramp")) {
    Section s(root.Raw("offramp"), "offramp");
    std::string mode;
    s.Get("mode", mode);
    if (!mode.empty()) {
      sim.offramp.mode = ParseEnum<OfframpMode>(
          "offramp.mode", mode,
          {{"perplexity", OfframpMode::kPerplexity}, {"naive", OfframpMode::kNaive},
           {"always_local", OfframpMode::kAlwaysLocal},
           {"always_offload", OfframpMode::kAlwaysOffload}});
    }
    s.Get("theta", sim.offramp.theta);
    s.Get("alpha", sim.offramp.alpha);
    s.Get("attn_only", sim.offramp.attn_only);
    s.Get("offload_without_reference", sim.offramp.offload_without_reference);
    s.Finish();
  }
  if (root.Has("cost")) {
    Section s(root.Raw("cost"), "cost");
    s.Get("attn_eval_s", sim.cost.attn_eval_s);
    s.Get("ctc_frame_s", sim.cost.ctc_frame_s);
    s.Get("conv_frame_s", sim.cost.conv_frame_s);
    s.Get("attn_frame2_s", sim.cost.attn_frame2_s);
    s.Get("attn_layers", sim.cost.attn_layers);
    s.Get("pilot_overhead_s", sim.cost.pilot_overhead_s);
    s.Finish();
  }
  if (root.Has("network")) {
    Section s(root.Raw("network"), "network");
    s.Get("rtt_s", sim.network.rtt_s);
    s.Get("rtt_jitter_s", sim.network.rtt_jitter_s);
    s.Get("upload_s_per_kb", sim.network.upload_s_per_kb);
    s.Get("audio_kb_per_s", sim.network.audio_kb_per_s);
    s.Get("cloud_compute_s", sim.network.cloud_compute_s);
    s.Get("cloud_jitter_s", sim.network.cloud_jitter_s);
    s.Finish();
  }
  if (root.Has("cloud")) {
    Section s(root.Raw("cloud"), "cloud");
    s.Get("residual_error_rate", sim.cloud.residual_error_rate);
    s.Finish();
  }
  if (root.Has("encoder")) {
    Section s(root.Raw("encoder"), "encoder");
    s.Get("conv_layers", sim.encoder.conv_layers);
    s.Get("kernel", sim.encoder.kernel);
    s.Get("attn_layers", sim.encoder.attn_layers);
    s.Get("dim", sim.encoder.dim);
    s.Get("seed", sim.encoder.seed);
    s.Get("residual_scale", sim.encoder.residual_scale);
    s.Get("ctc_gain", sim.encoder.ctc_gain);
    s.Finish();
  }
  if (root.Has("sim")) {
    Section s(root.Raw("sim"), "sim");
    std::string mode;
    s.Get("lattice_mode", mode);
    if (!mode.empty()) {
      sim.lattice_mode = ParseEnum<LatticeMode>(
          "sim.lattice_mode", mode,
          {{"teacher", LatticeMode::kTeacher}, {"encoder", LatticeMode::kEncoder}});
    }
    s.Get("pilot_perturbation", sim.pilot_perturbation);
    s.Get("segment_s", sim.segment_s);
    s.Get("num_threads", sim.num_threads);
    s.Finish();
  }
  root.Finish();
  cfg.Validate();
  return cfg;
}

RunConfig LoadRunConfig(const std::string& path, RunConfig base) {
  std::ifstream in(path);
  if (!in) throw InvalidConfig("config: cannot open '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw InvalidConfig("config: malformed JSON in '" + path + "': " + e.what());
  }
  return ParseRunConfig(j, std::move(base));
}

json ToJson(const RunConfig& cfg) {
  const SimConfig& sim = cfg.sim;
  json mix = json::array();
  for (const auto& [noise, frac] : cfg.mix) mix.push_back({noise, frac});
  return json{
      {"seed", cfg.seed},
      {"vocab",
       {{"tokens", sim.vocab.tokens},
        {"blank_id", sim.vocab.blank_id},
        {"sos_id", sim.vocab.sos_id},
        {"eos_id", sim.vocab.eos_id}}},
      {"lattice",
       {{"frame_duration", sim.lattice.frame_duration},
        {"blank_bias", sim.lattice.blank_bias},
        {"noise_sharpness", sim.lattice.noise_sharpness},
        {"floor", sim.lattice.floor}}},
      {"corpus",
       {{"n", cfg.corpus_n},
        {"mix", mix},
        {"min_duration_s", sim.corpus.min_duration_s},
        {"max_duration_s", sim.corpus.max_duration_s},
        {"tokens_per_second", sim.corpus.tokens_per_second},
        {"lead_silence_s", sim.corpus.lead_silence_s},
        {"trail_silence_s", sim.corpus.trail_silence_s},
        {"max_tokens", sim.corpus.max_tokens},
        {"write_lattices", cfg.write_lattices}}},
      {"scorer",
       {{"kind", sim.scorer.kind == ScorerKind::kTeacher ? "teacher" : "ngram"},
        {"fidelity", sim.scorer.fidelity},
        {"noise_coupling", sim.scorer.noise_coupling},
        {"ngram_order", sim.scorer.ngram_order},
        {"seed", sim.scorer.seed}}},
      {"beam",
       {{"beam_width", sim.beam.beam_width},
        {"lambda", sim.beam.lambda},
        {"max_tokens", sim.beam.max_tokens},
        {"end_detect_margin", DoubleToJson(sim.beam.end_detect_margin)},
        {"collapse", sim.beam.collapse},
        {"early_term", sim.beam.early_term},
        {"early_term_c", sim.beam.early_term_c},
        {"leap", sim.beam.leap},
        {"leap_q", sim.beam.leap_q}}},
      {"pilot",
       {{"enabled", sim.pilots_enabled},
        {"granularity_s", sim.pilot.granularity_s},
        {"min_partial_s", sim.pilot.min_partial_s},
        {"granularity_growth", sim.pilot.granularity_growth},
        {"beam_width", sim.pilot.beam_width},
        {"token_limit_mode",
         sim.pilot.token_limit_mode == TokenLimitMode::kAbsolute ? "absolute" : "ratio"},
        {"token_limit", sim.pilot.token_limit},
        {"token_limit_ratio", sim.pilot.token_limit_ratio},
        {"avg_full_len", sim.pilot.avg_full_len},
        {"incremental", sim.pilot.incremental}}},
      {"offramp",
       {{"mode", ModeName(sim.offramp.mode)},
        {"theta", DoubleToJson(sim.offramp.theta)},
        {"alpha", sim.offramp.alpha},
        {"attn_only", sim.offramp.attn_only},
        {"offload_without_reference", sim.offramp.offload_without_reference}}},
      {"cost",
       {{"attn_eval_s", sim.cost.attn_eval_s},
        {"ctc_frame_s", sim.cost.ctc_frame_s},
        {"conv_frame_s", sim.cost.conv_frame_s},
        {"attn_frame2_s", sim.cost.attn_frame2_s},
        {"attn_layers", sim.cost.attn_layers},
        {"pilot_overhead_s", sim.cost.pilot_overhead_s}}},
      {"network",
       {{"rtt_s", sim.network.rtt_s},
        {"rtt_jitter_s", sim.network.rtt_jitter_s},
        {"upload_s_per_kb", sim.network.upload_s_per_kb},
        {"audio_kb_per_s", sim.network.audio_kb_per_s},
        {"cloud_compute_s", sim.network.cloud_compute_s},
        {"cloud_jitter_s", sim.network.cloud_jitter_s}}},
      {"cloud", {{"residual_error_rate", sim.cloud.residual_error_rate}}},
      {"encoder",
       {{"conv_layers", sim.encoder.conv_layers},
        {"kernel", sim.encoder.kernel},
        {"attn_layers", sim.encoder.attn_layers},
        {"dim", sim.encoder.dim},
        {"seed", sim.encoder.seed},
        {"residual_scale", sim.encoder.residual_scale},
        {"ctc_gain", sim.encoder.ctc_gain}}},
      {"sim",
       {{"lattice_mode", sim.lattice_mode == LatticeMode::kTeacher ? "teacher" : "encoder"},
        {"pilot_perturbation", sim.pilot_perturbation},
        {"segment_s", sim.segment_s},
        {"num_threads", sim.num_threads}}},
  };
}

}  // namespace streamsu
