// Copyright 2026 The aecns Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "aecns/pipeline.h"

#include <cmath>
#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "aecns/error.h"
#include "aecns/metrics.h"
#include "aecns/scene.h"
#include "oracles.h"

namespace aecns {
namespace {

using testing::GaussianVector;

mctcn::ModelConfig SmallModel() {
  mctcn::ModelConfig m;
  m.d_model = 8;
  m.d_f = 4;
  m.num_blocks = 2;
  m.max_dilation = 2;
  return m;
}

SessionConfig NetworkOnly() {
  SessionConfig cfg;
  cfg.model = SmallModel();
  cfg.no_delay = true;
  cfg.no_filter = true;
  return cfg;
}

std::shared_ptr<const mctcn::MctcnModel> RandomModel(const mctcn::ModelConfig& cfg,
                                                     uint64_t seed) {
  return std::make_shared<const mctcn::MctcnModel>(mctcn::RandomWeights(cfg, seed), cfg);
}

// Output layers silenced and biased so both masks sit at unit gain and zero
// phase: the network passes its input through.
std::shared_ptr<const mctcn::MctcnModel> TransparentModel(const mctcn::ModelConfig& cfg) {
  const mctcn::ModelWeights random = mctcn::RandomWeights(cfg, 1);
  mctcn::ModelWeights out;
  for (const auto& [name, t] : random.tensors()) {
    mctcn::Tensor s = t;
    if (name == "mag.out.weight" || name == "cplx.out_re.weight" ||
        name == "cplx.out_im.weight") {
      std::fill(s.data.begin(), s.data.end(), 0.0f);
    }
    if (name == "mag.out.bias" || name == "cplx.out_re.bias") {
      std::fill(s.data.begin(), s.data.end(), 60.0f);
    }
    out.Add(name, std::move(s));
  }
  return std::make_shared<const mctcn::MctcnModel>(out, cfg);
}

TEST(SessionConfigTest, Validate) {
  SessionConfig cfg;
  EXPECT_NO_THROW(cfg.Validate());
  cfg.no_delay = cfg.no_filter = cfg.no_network = true;
  EXPECT_THROW(cfg.Validate(), UsageError);
  cfg = SessionConfig{};
  cfg.mdf.block_samples = 128;
  EXPECT_THROW(cfg.Validate(), UsageError);
  cfg = SessionConfig{};
  cfg.model.bins = 129;
  EXPECT_THROW(cfg.Validate(), UsageError);
}

TEST(SessionConfigTest, ParsesDocument) {
  const SessionConfig cfg = ParseSessionConfig(R"({
    "weights": "model.bin", "no_filter": true,
    "model": {"d_model": 16, "num_blocks": 3, "max_dilation": 4},
    "mdf": {"num_blocks": 12, "base_step": 0.25},
    "delay": {"peaks_per_frame": 4, "guard_samples": 128}})");
  EXPECT_EQ(cfg.weights_path, "model.bin");
  EXPECT_TRUE(cfg.no_filter);
  EXPECT_FALSE(cfg.no_network);
  EXPECT_EQ(cfg.model.d_model, 16);
  EXPECT_EQ(cfg.model.num_blocks, 3);
  EXPECT_EQ(cfg.model.d_f, 64);
  EXPECT_EQ(cfg.mdf.num_blocks, 12);
  EXPECT_EQ(cfg.mdf.base_step, 0.25);
  EXPECT_EQ(cfg.delay.peaks_per_frame, 4);
  EXPECT_EQ(cfg.delay.guard_samples, 128);
  EXPECT_EQ(ParseSessionConfig("{}").model, mctcn::ModelConfig{});
}

TEST(SessionConfigTest, RejectsBadDocuments) {
  for (const char* doc : {
           "[1]",
           "{",
           R"({"wieghts": "x"})",
           R"({"model": {"blocks": 3}})",
           R"({"no_delay": "yes"})",
           R"({"mdf": {"base_step": 2.0}})",
           R"({"model": {"max_dilation": 3}})",
           R"({"no_delay": true, "no_filter": true, "no_network": true})",
       }) {
    EXPECT_THROW(ParseSessionConfig(doc), UsageError) << doc;
  }
  EXPECT_THROW(ReadSessionConfig("/nonexistent/session.json"), UsageError);
}

TEST(LoadModelTest, NeedsWeightsOnlyWithTheNetwork) {
  SessionConfig cfg;
  EXPECT_THROW(LoadModel(cfg), UsageError);
  cfg.no_network = true;
  EXPECT_EQ(LoadModel(cfg), nullptr);

  cfg = NetworkOnly();
  const auto path = (std::filesystem::temp_directory_path() / "aecns_pipeline_w.bin").string();
  mctcn::WriteWeightFile(path, mctcn::RandomWeights(cfg.model, 2));
  cfg.weights_path = path;
  const auto model = LoadModel(cfg);
  ASSERT_NE(model, nullptr);
  EXPECT_EQ(model->config(), cfg.model);
  cfg.model.d_model = 9;
  EXPECT_THROW(LoadModel(cfg), mctcn::WeightFileError);
  std::filesystem::remove(path);
}

TEST(SessionTest, RejectsMissingOrMismatchedModel) {
  SessionConfig cfg = NetworkOnly();
  EXPECT_THROW(Session(cfg, nullptr), UsageError);
  mctcn::ModelConfig other = cfg.model;
  other.d_f = 5;
  EXPECT_THROW(Session(cfg, RandomModel(other, 3)), UsageError);
  Session s(cfg, RandomModel(cfg.model, 3));
  EXPECT_EQ(s.latency_samples(), 256);
  EXPECT_THROW(s.ProcessHop(std::vector<double>(255), std::vector<double>(256)), DataError);
  std::vector<double> bad(256, 0.0);
  bad[3] = std::nan("");
  EXPECT_THROW(s.ProcessHop(bad, std::vector<double>(256)), DataError);
}

TEST(EnhanceTest, BypassedStagesPassTheMicrophoneThrough) {
  Rng rng(4);
  const Waveform near(GaussianVector(16000, rng)), far(GaussianVector(16000, rng));
  SessionConfig cfg;
  cfg.no_filter = true;
  cfg.no_network = true;
  const EnhanceResult r = Enhance(near, far, cfg, nullptr);
  EXPECT_EQ(r.output.samples, near.samples);
  EXPECT_EQ(r.error.samples, near.samples);
  EXPECT_EQ(Energy(r.echo.samples), 0.0);
  EXPECT_EQ(r.estimates.size(), (16000u + 255) / 256);
  EXPECT_TRUE(r.warnings.empty());
}

TEST(EnhanceTest, TransparentNetworkIsAlignedWithTheInput) {
  Rng rng(5);
  const Waveform near(GaussianVector(10000, rng, 0.1));
  const Waveform far(GaussianVector(10000, rng, 0.1));
  const SessionConfig cfg = NetworkOnly();
  const EnhanceResult r = Enhance(near, far, cfg, TransparentModel(cfg.model));
  ASSERT_EQ(r.output.size(), near.size());
  for (size_t i = 0; i < near.size(); ++i) {
    ASSERT_NEAR(r.output.samples[i], near.samples[i], 1e-9) << i;
  }
}

TEST(EnhanceTest, OutputIsCausalWithOneHopOfLookahead) {
  // With latency removed, output sample n may see input up to the end of
  // the STFT frame holding it: (n / 256 + 2) * 256 samples.
  Rng rng(6);
  const size_t n = 12000, k = 7000;
  const Waveform far(GaussianVector(n, rng, 0.1));
  std::vector<double> near = testing::NaiveConvolve(far.samples, GaussianVector(300, rng, 0.1));
  const auto talk = GaussianVector(n, rng, 0.05);
  for (size_t i = 0; i < n; ++i) near[i] += talk[i];
  SessionConfig cfg;
  cfg.model = SmallModel();
  const auto model = RandomModel(cfg.model, 7);
  const EnhanceResult a = Enhance(Waveform(near), far, cfg, model);
  std::vector<double> changed = near;
  changed[k] += 1.0;
  const EnhanceResult b = Enhance(Waveform(changed), far, cfg, model);
  const size_t safe = (k / 256 - 1) * 256;
  for (size_t i = 0; i < safe; ++i) ASSERT_EQ(a.output.samples[i], b.output.samples[i]) << i;
  for (size_t i = 0; i < k; ++i) ASSERT_EQ(a.error.samples[i], b.error.samples[i]) << i;
  bool differs = false;
  for (size_t i = safe; i < n; ++i) differs |= a.output.samples[i] != b.output.samples[i];
  EXPECT_TRUE(differs);
}

TEST(EnhanceTest, MatchesManualHopByHopSession) {
  Rng rng(8);
  const size_t n = 5000;
  const Waveform near(GaussianVector(n, rng, 0.1)), far(GaussianVector(n, rng, 0.1));
  SessionConfig cfg;
  cfg.model = SmallModel();
  const auto model = RandomModel(cfg.model, 9);
  const EnhanceResult r = Enhance(near, far, cfg, model);
  Session s(cfg, model);
  std::vector<double> out;
  for (size_t t = 0; t * 256 < n + 256; ++t) {
    std::vector<double> nh(256, 0.0), fh(256, 0.0);
    for (size_t i = 0; i < 256 && t * 256 + i < n; ++i) {
      nh[i] = near.samples[t * 256 + i];
      fh[i] = far.samples[t * 256 + i];
    }
    const auto h = s.ProcessHop(nh, fh);
    out.insert(out.end(), h.output.begin(), h.output.end());
  }
  for (size_t i = 0; i < n; ++i) ASSERT_EQ(r.output.samples[i], out[i + 256]) << i;
}

TEST(EnhanceTest, TruncatesMismatchedLengthsWithWarning) {
  Rng rng(10);
  const Waveform near(GaussianVector(3000, rng)), far(GaussianVector(2500, rng));
  SessionConfig cfg;
  cfg.no_network = true;
  const EnhanceResult r = Enhance(near, far, cfg, nullptr);
  EXPECT_EQ(r.output.size(), 2500u);
  ASSERT_EQ(r.warnings.size(), 1u);
  Waveform wrong_rate = near;
  wrong_rate.sample_rate = 8000;
  EXPECT_THROW(Enhance(wrong_rate, near, cfg, nullptr), DataError);
}

TEST(EnhanceTest, CancelsDelayedEcho) {
  SceneSpec spec;
  spec.duration_s = 12.0;
  spec.seed = 11;
  spec.near_active = false;
  spec.noise_active = false;
  spec.echo_silence_prob = 0.0;
  spec.far_delay_ms = 500.0;
  const Scene scene = GenerateScene(spec);
  SessionConfig cfg;
  cfg.no_network = true;
  const EnhanceResult r = Enhance(scene.d, scene.x, cfg, nullptr);
  EXPECT_NEAR(r.applied_lags.back(), 8000, 256);
  const size_t from = 8 * 16000;
  const auto tail = [&](const Waveform& w) {
    return std::span(w.samples).subspan(from, w.size() - from);
  };
  EXPECT_GT(Erle(tail(scene.d), tail(r.output)), 10.0);
}

}  // namespace
}  // namespace aecns
