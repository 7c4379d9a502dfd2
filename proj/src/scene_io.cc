// Copyright 2026 The aecns Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "aecns/scene_io.h"

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "aecns/error.h"
#include "aecns/wav_io.h"

namespace aecns {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

Range ParseRange(const json& v, const std::string& key) {
  if (v.is_number()) return {v.get<double>(), v.get<double>()};
  if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number()) {
    return {v[0].get<double>(), v[1].get<double>()};
  }
  throw UsageError("scene config: '" + key + "' must be a number or [min, max]");
}

double ParseNumber(const json& v, const std::string& key) {
  if (!v.is_number()) throw UsageError("scene config: '" + key + "' must be a number");
  return v.get<double>();
}

bool ParseBool(const json& v, const std::string& key) {
  if (!v.is_boolean()) throw UsageError("scene config: '" + key + "' must be true or false");
  return v.get<bool>();
}

std::string ReadText(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json RirJson(const RirSpec& r) {
  return {{"length", r.length},
          {"rt60_s", r.rt60_s},
          {"direct_delay", r.direct_delay},
          {"tail_energy", r.tail_energy}};
}

}  // namespace

SceneRanges ParseSceneRanges(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw UsageError(std::string("scene config: ") + e.what());
  }
  if (!doc.is_object()) throw UsageError("scene config: top level must be an object");
  SceneRanges r;
  for (const auto& [key, v] : doc.items()) {
    if (key == "duration_s") {
      r.duration_s = ParseNumber(v, key);
    } else if (key == "snr_db") {
      r.snr_db = ParseRange(v, key);
    } else if (key == "ser_db") {
      r.ser_db = ParseRange(v, key);
    } else if (key == "noise_silence_prob") {
      r.noise_silence_prob = ParseNumber(v, key);
    } else if (key == "echo_silence_prob") {
      r.echo_silence_prob = ParseNumber(v, key);
    } else if (key == "far_delay_ms") {
      r.far_delay_ms = ParseRange(v, key);
    } else if (key == "near_rt60_s") {
      r.near_rt60_s = ParseRange(v, key);
    } else if (key == "echo_rt60_s") {
      r.echo_rt60_s = ParseRange(v, key);
    } else if (key == "rir_length") {
      if (!v.is_number_integer()) throw UsageError("scene config: 'rir_length' must be an integer");
      r.rir_length = v.get<int>();
    } else if (key == "near_active") {
      r.near_active = ParseBool(v, key);
    } else if (key == "noise_active") {
      r.noise_active = ParseBool(v, key);
    } else if (key == "far_active") {
      r.far_active = ParseBool(v, key);
    } else if (key == "far_source_weights") {
      if (!v.is_object()) throw UsageError("scene config: 'far_source_weights' must be an object");
      r.far_speech_weight = 0.0;
      r.far_white_weight = 0.0;
      for (const auto& [kind, weight] : v.items()) {
        if (kind == "speech") {
          r.far_speech_weight = ParseNumber(weight, key + "." + kind);
        } else if (kind == "white") {
          r.far_white_weight = ParseNumber(weight, key + "." + kind);
        } else {
          throw UsageError("scene config: unknown far source '" + kind + "'");
        }
      }
    } else {
      throw UsageError("scene config: unknown key '" + key + "'");
    }
  }
  r.Validate();
  return r;
}

SceneRanges ReadSceneRanges(const std::string& path) {
  std::ifstream probe(path);
  if (!probe) throw UsageError("cannot open scene config " + path);
  return ParseSceneRanges(ReadText(path));
}

std::string SceneSpecToJson(const SceneSpec& spec) {
  const json j = {{"duration_s", spec.duration_s},
                  {"snr_db", spec.snr_db},
                  {"ser_db", spec.ser_db},
                  {"noise_silence_prob", spec.noise_silence_prob},
                  {"echo_silence_prob", spec.echo_silence_prob},
                  {"far_delay_ms", spec.far_delay_ms},
                  {"seed", spec.seed},
                  {"near_active", spec.near_active},
                  {"noise_active", spec.noise_active},
                  {"far_active", spec.far_active},
                  {"far_source", SourceKindName(spec.far_source)},
                  {"noise_source", SourceKindName(spec.noise_source)},
                  {"length_jitter", spec.length_jitter},
                  {"near_rir", RirJson(spec.near_rir)},
                  {"echo_rir", RirJson(spec.echo_rir)}};
  return j.dump(2);
}

void ExportScene(const Scene& scene, const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw DataError("cannot create " + dir + ": " + ec.message());
  const fs::path root(dir);
  WriteWav((root / "s.wav").string(), scene.s);
  WriteWav((root / "x.wav").string(), scene.x);
  WriteWav((root / "d.wav").string(), scene.d);
  WriteWav((root / "y.wav").string(), scene.y);
  WriteWav((root / "w.wav").string(), scene.w);
  WriteWav((root / "near_rir.wav").string(), Waveform(scene.truth.near_rir.taps));
  WriteWav((root / "echo_rir.wav").string(), Waveform(scene.truth.echo_rir.taps));

  const SceneTruth& t = scene.truth;
  const json manifest = {
      {"format", "aecns-scene"},
      {"version", 1},
      {"sample_rate", kSampleRate},
      {"num_samples", scene.d.size()},
      {"files",
       {{"near_speech", "s.wav"},
        {"far", "x.wav"},
        {"mic", "d.wav"},
        {"echo", "y.wav"},
        {"noise", "w.wav"},
        {"near_rir", "near_rir.wav"},
        {"echo_rir", "echo_rir.wav"}}},
      {"spec", json::parse(SceneSpecToJson(t.spec))},
      {"truth",
       {{"far_delay_samples", t.far_delay_samples},
        {"noise_silenced", t.noise_silenced},
        {"echo_silenced", t.echo_silenced},
        {"reference_power", t.reference_power}}}};
  std::ofstream out(root / "manifest.json");
  out << manifest.dump(2) << "\n";
  if (!out) throw DataError("cannot write manifest in " + dir);
}

SceneFiles LoadSceneFiles(const std::string& dir) {
  const fs::path root(dir);
  if (!fs::is_directory(root)) throw DataError("scene directory not found: " + dir);
  SceneFiles files;
  files.d = ReadWav((root / "d.wav").string());
  files.x = ReadWav((root / "x.wav").string());
  auto optional = [&](const char* name) -> std::optional<Waveform> {
    const fs::path p = root / name;
    if (!fs::exists(p)) return std::nullopt;
    return ReadWav(p.string());
  };
  files.s = optional("s.wav");
  files.y = optional("y.wav");
  files.w = optional("w.wav");
  if (fs::exists(root / "manifest.json")) {
    files.manifest_json = ReadText((root / "manifest.json").string());
  }
  return files;
}

}  // namespace aecns
