// Copyright 2026 The aecns Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef AECNS_SCENE_IO_H_
#define AECNS_SCENE_IO_H_

#include <optional>
#include <string>

#include "aecns/scene.h"
#include "aecns/waveform.h"

namespace aecns {

// Scene-range document, JSON. Every key is optional; numeric ranges accept
// either a number (fixed) or a two-element [min, max] array:
//
//   {
//     "duration_s": 10,
//     "snr_db": [5, 25],
//     "ser_db": [-5, 20],
//     "noise_silence_prob": 0.2,
//     "echo_silence_prob": 0.2,
//     "far_delay_ms": [0, 1000],
//     "near_rt60_s": [0.2, 0.6],
//     "echo_rt60_s": [0.2, 0.6],
//     "rir_length": 4608,
//     "near_active": true, "noise_active": true, "far_active": true,
//     "far_source_weights": {"speech": 1, "white": 0}
//   }
//
// Unknown keys and malformed values throw UsageError.
SceneRanges ParseSceneRanges(const std::string& json_text);
SceneRanges ReadSceneRanges(const std::string& path);

// Scene directory layout: s.wav (reverberant near-end speech), x.wav, d.wav,
// y.wav, w.wav, near_rir.wav, echo_rir.wav and manifest.json carrying the
// concrete SceneSpec and the silence draws.
void ExportScene(const Scene& scene, const std::string& dir);

struct SceneFiles {
  Waveform d;
  Waveform x;
  std::optional<Waveform> s;
  std::optional<Waveform> y;
  std::optional<Waveform> w;
  std::string manifest_json;  // empty if absent
};

// d.wav and x.wav are required; everything else is optional.
SceneFiles LoadSceneFiles(const std::string& dir);

std::string SceneSpecToJson(const SceneSpec& spec);

}  // namespace aecns

#endif  // AECNS_SCENE_IO_H_
