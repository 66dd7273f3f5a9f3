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

#include <cmath>
#include <sstream>

#include "gtest/gtest.h"
#include "streamsu/config.h"
#include "streamsu/errors.h"
#include "streamsu/io.h"

namespace streamsu {
namespace {

using nlohmann::json;

TEST(ConfigTest, DefaultsRoundTrip) {
  const RunConfig def;
  const json j = ToJson(def);
  EXPECT_EQ(ToJson(ParseRunConfig(j)), j);
}

TEST(ConfigTest, OverlaysFields) {
  const RunConfig cfg = ParseRunConfig(json::parse(R"({
    "seed": 3,
    "beam": {"beam_width": 2, "collapse": true, "end_detect_margin": "inf"},
    "offramp": {"mode": "naive", "alpha": 0.25},
    "corpus": {"n": 12, "mix": [[0.1, 0.5], [0.7, 0.5]]},
    "sim": {"lattice_mode": "teacher"}
  })"));
  EXPECT_EQ(cfg.seed, 3u);
  EXPECT_EQ(cfg.sim.beam.beam_width, 2);
  EXPECT_TRUE(cfg.sim.beam.collapse);
  EXPECT_TRUE(std::isinf(cfg.sim.beam.end_detect_margin));
  EXPECT_EQ(cfg.sim.offramp.mode, OfframpMode::kNaive);
  EXPECT_EQ(cfg.corpus_n, 12);
  ASSERT_EQ(cfg.mix.size(), 2u);
  EXPECT_EQ(cfg.sim.beam.lambda, 0.7);  // untouched default
}

TEST(ConfigTest, InfiniteThetaRoundTrips) {
  RunConfig cfg;
  cfg.sim.offramp.theta = std::numeric_limits<double>::infinity();
  const json j = ToJson(cfg);
  EXPECT_EQ(j["offramp"]["theta"], "inf");
  EXPECT_TRUE(std::isinf(ParseRunConfig(j).sim.offramp.theta));
}

void ExpectRejected(const std::string& text, const std::string& needle) {
  try {
    ParseRunConfig(json::parse(text));
    ADD_FAILURE() << "accepted: " << text;
  } catch (const InvalidConfig& e) {
    EXPECT_NE(std::string(e.what()).find(needle), std::string::npos) << e.what();
  }
}

TEST(ConfigTest, RejectsUnknownKeys) {
  ExpectRejected(R"({"bogus": 1})", "bogus");
  ExpectRejected(R"({"beam": {"beam_widht": 3}})", "beam.beam_widht");
}

TEST(ConfigTest, RejectsBadValues) {
  ExpectRejected(R"({"beam": {"beam_width": "five"}})", "beam.beam_width");
  ExpectRejected(R"({"beam": {"beam_width": 0}})", "beam.beam_width");
  ExpectRejected(R"({"corpus": {"mix": [[0.1, 0.6], [0.2, 0.6]]}})", "corpus.mix");
  ExpectRejected(R"({"offramp": {"mode": "sometimes"}})", "offramp.mode");
  ExpectRejected(R"({"scorer": {"fidelity": 2}})", "scorer.fidelity");
  ExpectRejected(R"({"vocab": {"num_words": 0}})", "vocab.num_words");
}

TEST(ConfigTest, MissingFile) {
  EXPECT_THROW(LoadRunConfig("/nonexistent/streamsu.json"), InvalidConfig);
}

Corpus SmallCorpus() {
  Corpus c;
  c.seed = 4;
  c.vocab = Vocab::Default();
  c.utterances = GenCorpus(5, {{0.3, 1.0}}, 4, c.vocab);
  return c;
}

TEST(CorpusIoTest, RoundTrip) {
  const Corpus c = SmallCorpus();
  const Corpus back = CorpusFromJson(CorpusToJson(c, false));
  ASSERT_EQ(back.utterances.size(), c.utterances.size());
  EXPECT_TRUE(back.lattices.empty());
  for (size_t i = 0; i < c.utterances.size(); ++i) {
    EXPECT_EQ(back.utterances[i].truth, c.utterances[i].truth);
    EXPECT_EQ(back.utterances[i].alignment, c.utterances[i].alignment);
    EXPECT_EQ(back.utterances[i].duration_s, c.utterances[i].duration_s);
    EXPECT_EQ(back.utterances[i].seed, c.utterances[i].seed);
    EXPECT_EQ(back.LatticeFor(i), c.LatticeFor(i));
  }
  EXPECT_EQ(CorpusToJson(back, false).dump(), CorpusToJson(c, false).dump());
}

TEST(CorpusIoTest, StoredLatticesRoundTrip) {
  const Corpus c = SmallCorpus();
  const Corpus back = CorpusFromJson(CorpusToJson(c, true));
  ASSERT_EQ(back.lattices.size(), c.utterances.size());
  for (size_t i = 0; i < c.utterances.size(); ++i) EXPECT_EQ(back.lattices[i], c.LatticeFor(i));
}

TEST(CorpusIoTest, RejectsSchemaViolations) {
  json j = CorpusToJson(SmallCorpus(), false);
  json extra = j;
  extra["surprise"] = 1;
  EXPECT_THROW(CorpusFromJson(extra), InvalidConfig);
  json wrong = j;
  wrong["format"] = "other";
  EXPECT_THROW(CorpusFromJson(wrong), InvalidConfig);
  json missing = j;
  missing["utterances"][0].erase("alignment");
  EXPECT_THROW(CorpusFromJson(missing), InvalidConfig);
  json bad = j;
  bad["utterances"][0]["truth"] = json::array({2});
  EXPECT_THROW(CorpusFromJson(bad), InvalidUtterance);
}

TEST(CsvTest, StableHeader) {
  std::ostringstream out;
  WriteAggregateCsv(out, {});
  EXPECT_EQ(out.str(),
            "mode,param,tau,n,offload_frac,mean_wer,mean_latency_s,p90_latency_s,mean_rtf,"
            "attn_evals,ctc_frames,decode_rounds,mean_decode_s,infeasible\n");
  std::ostringstream dec;
  WriteDecodeCsv(dec, {});
  EXPECT_EQ(dec.str(),
            "id,noise_level,ref_len,hyp_len,wer,attn_evals,ctc_frames,decode_rounds,"
            "collapse_hits,collapse_divergences,early_terminated,predicted_length,"
            "leap_extensions,reference_pilot,decode_s\n");
}

TEST(CsvTest, FormatDouble) {
  EXPECT_EQ(FormatDouble(0.1), "0.1");
  EXPECT_EQ(FormatDouble(2.0), "2");
  EXPECT_EQ(FormatDouble(std::numeric_limits<double>::infinity()), "inf");
  EXPECT_EQ(std::stod(FormatDouble(1.0 / 3.0)), 1.0 / 3.0);
}

}  // namespace
}  // namespace streamsu
