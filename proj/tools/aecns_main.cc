// Copyright 2026 The aecns Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

// Command-line front end: enhance, simulate, metrics, init-weights.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "aecns/error.h"
#include "aecns/mctcn/weights.h"
#include "aecns/pipeline.h"
#include "aecns/report.h"
#include "aecns/scene.h"
#include "aecns/scene_io.h"
#include "aecns/wav_io.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitInvariant = 3;

struct EnhanceArgs {
  std::string near, far, out, weights, config;
  bool no_network = false, no_filter = false, no_delay = false;
};

struct SimulateArgs {
  std::string spec, out_dir;
  int count = 1;
  uint64_t seed = 0;
};

struct MetricsArgs {
  std::string scene_dir, enhanced, json;
};

struct InitWeightsArgs {
  std::string out, config;
  uint64_t seed = 0;
};

int RunEnhance(const EnhanceArgs& a) {
  aecns::SessionConfig cfg;
  if (!a.config.empty()) cfg = aecns::ReadSessionConfig(a.config);
  if (!a.weights.empty()) cfg.weights_path = a.weights;
  cfg.no_network = cfg.no_network || a.no_network;
  cfg.no_filter = cfg.no_filter || a.no_filter;
  cfg.no_delay = cfg.no_delay || a.no_delay;
  cfg.Validate();
  auto model = aecns::LoadModel(cfg);
  const aecns::Waveform near = aecns::ReadWav(a.near);
  const aecns::Waveform far = aecns::ReadWav(a.far);
  const aecns::EnhanceResult r = aecns::Enhance(near, far, cfg, model);
  for (const std::string& w : r.warnings) std::cerr << "warning: " << w << "\n";
  aecns::WriteWav(a.out, r.output);
  return kExitOk;
}

int RunSimulate(const SimulateArgs& a) {
  if (a.count < 1) throw aecns::UsageError("--count must be >= 1");
  const aecns::SceneRanges ranges = aecns::ReadSceneRanges(a.spec);
  for (int i = 0; i < a.count; ++i) {
    const aecns::SceneSpec spec = aecns::SampleSpec(ranges, a.seed + static_cast<uint64_t>(i));
    const aecns::Scene scene = aecns::GenerateScene(spec);
    char name[32];
    std::snprintf(name, sizeof(name), "scene_%05d", i);
    const std::string dir = (std::filesystem::path(a.out_dir) / name).string();
    aecns::ExportScene(scene, dir);
    std::cout << dir << "\n";
  }
  return kExitOk;
}

int RunMetrics(const MetricsArgs& a) {
  const aecns::SceneFiles files = aecns::LoadSceneFiles(a.scene_dir);
  aecns::Waveform enhanced = aecns::ReadWav(a.enhanced);
  if (enhanced.size() != files.d.size()) {
    throw aecns::DataError("enhanced length " + std::to_string(enhanced.size()) +
                           " differs from scene length " + std::to_string(files.d.size()));
  }
  const aecns::MetricReport report = aecns::RunMetrics(files.d, enhanced, files.s, files.y);
  const std::string text = aecns::ReportToJson(report);
  if (a.json.empty() || a.json == "-") {
    std::cout << text << "\n";
  } else {
    std::ofstream out(a.json);
    out << text << "\n";
    if (!out) throw aecns::DataError("cannot write " + a.json);
  }
  return kExitOk;
}

int RunInitWeights(const InitWeightsArgs& a) {
  aecns::SessionConfig cfg;
  if (!a.config.empty()) cfg = aecns::ReadSessionConfig(a.config);
  aecns::mctcn::WriteWeightFile(a.out, aecns::mctcn::RandomWeights(cfg.model, a.seed));
  std::cout << aecns::mctcn::ParamCount(cfg.model) << " parameters written to " << a.out << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"aecns: streaming echo cancellation and noise suppression"};
  app.require_subcommand(1);

  EnhanceArgs enhance;
  CLI::App* enhance_cmd = app.add_subcommand("enhance", "Process a near/far recording pair");
  enhance_cmd->add_option("--near", enhance.near, "Microphone WAV (16 kHz mono)")->required();
  enhance_cmd->add_option("--far", enhance.far, "Far-end reference WAV")->required();
  enhance_cmd->add_option("--out", enhance.out, "Output WAV")->required();
  enhance_cmd->add_option("--weights", enhance.weights, "Network weight file");
  enhance_cmd->add_option("--config", enhance.config, "Session config JSON");
  enhance_cmd->add_flag("--no-network", enhance.no_network, "Bypass the neural stage");
  enhance_cmd->add_flag("--no-filter", enhance.no_filter, "Bypass the adaptive filter");
  enhance_cmd->add_flag("--no-delay", enhance.no_delay, "Bypass delay compensation");

  SimulateArgs simulate;
  CLI::App* simulate_cmd = app.add_subcommand("simulate", "Generate synthetic scenes");
  simulate_cmd->add_option("--spec", simulate.spec, "Scene range JSON")->required();
  simulate_cmd->add_option("--out-dir", simulate.out_dir, "Output directory")->required();
  simulate_cmd->add_option("--count", simulate.count, "Number of scenes");
  simulate_cmd->add_option("--seed", simulate.seed, "First scene seed");

  MetricsArgs metrics;
  CLI::App* metrics_cmd = app.add_subcommand("metrics", "Score an enhanced file against a scene");
  metrics_cmd->add_option("--scene-dir", metrics.scene_dir, "Scene directory")->required();
  metrics_cmd->add_option("--enhanced", metrics.enhanced, "Enhanced WAV")->required();
  metrics_cmd->add_option("--json", metrics.json, "Report path ('-' for stdout)");

  InitWeightsArgs init;
  CLI::App* init_cmd = app.add_subcommand("init-weights", "Write seeded random network weights");
  init_cmd->add_option("--out", init.out, "Weight file")->required();
  init_cmd->add_option("--seed", init.seed, "Seed");
  init_cmd->add_option("--config", init.config, "Session config JSON (model shape)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*enhance_cmd) return RunEnhance(enhance);
    if (*simulate_cmd) return RunSimulate(simulate);
    if (*metrics_cmd) return RunMetrics(metrics);
    if (*init_cmd) return RunInitWeights(init);
  } catch (const aecns::UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const aecns::DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const aecns::InvariantError& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInvariant;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInvariant;
  }
  return kExitUsage;
}
