// Copyright 2026 The aecns Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef AECNS_REPORT_H_
#define AECNS_REPORT_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "aecns/waveform.h"

namespace aecns {

enum class Segment { kSilence, kNearSingleTalk, kFarSingleTalk, kDoubleTalk };
const char* SegmentName(Segment s);

struct SegmenterConfig {
  int frame_samples = 160;  // 10 ms
  // A frame is active when its mean square exceeds this fraction of the
  // loudest frame of the same signal (and an absolute floor).
  double relative_gate_db = -40.0;
  double absolute_floor = 1e-10;
  // Frames an activity decision is held after the signal drops.
  int hangover_frames = 1;
};

// Per-frame activity of a ground-truth signal, hangover included.
std::vector<bool> ActivityGate(const Waveform& x, const SegmenterConfig& cfg = {});

// One label per frame from near-end speech and echo activity. The last
// frame may be partial.
std::vector<Segment> ClassifySegments(const Waveform& near_speech, const Waveform& echo,
                                      const SegmenterConfig& cfg = {});

struct SegmentMetrics {
  Segment segment = Segment::kSilence;
  int64_t samples = 0;
  std::optional<double> si_snr_db;        // output vs near-end speech
  std::optional<double> input_si_snr_db;  // microphone vs near-end speech
  std::optional<double> erle_db;          // far single talk only
};

struct MetricReport {
  int64_t samples = 0;
  double output_rms = 0.0;
  double output_peak = 0.0;
  double input_rms = 0.0;
  bool has_truth = false;
  std::optional<double> si_snr_db;
  std::optional<double> input_si_snr_db;
  std::vector<SegmentMetrics> segments;  // near single, far single, double talk
  std::vector<std::string> notes;
};

// `near_speech` (reverberant) and `echo` are the ground truth; if
// `near_speech` is absent only signal statistics are reported. A missing
// echo is treated as silent.
MetricReport RunMetrics(const Waveform& mic, const Waveform& enhanced,
                        const std::optional<Waveform>& near_speech,
                        const std::optional<Waveform>& echo, const SegmenterConfig& cfg = {});

// JSON report:
//   {"samples": N, "has_truth": bool,
//    "signal": {"output_rms", "output_peak", "input_rms"},
//    "si_snr_db": {"output": x|null, "input": x|null},
//    "segments": {"near_single_talk": {"samples", "si_snr_db", "input_si_snr_db"},
//                 "far_single_talk": {"samples", "erle_db"},
//                 "double_talk": {"samples", "si_snr_db", "input_si_snr_db"}},
//    "notes": [...]}
std::string ReportToJson(const MetricReport& report);

}  // namespace aecns

#endif  // AECNS_REPORT_H_
