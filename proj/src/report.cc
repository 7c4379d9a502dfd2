// Copyright 2026 The aecns Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "aecns/report.h"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "aecns/error.h"
#include "aecns/metrics.h"

namespace aecns {
namespace {

using nlohmann::json;

json OrNull(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

const char* SegmentName(Segment s) {
  switch (s) {
    case Segment::kSilence:
      return "silence";
    case Segment::kNearSingleTalk:
      return "near_single_talk";
    case Segment::kFarSingleTalk:
      return "far_single_talk";
    case Segment::kDoubleTalk:
      return "double_talk";
  }
  return "?";
}

std::vector<bool> ActivityGate(const Waveform& x, const SegmenterConfig& cfg) {
  const size_t fl = static_cast<size_t>(cfg.frame_samples);
  const size_t frames = (x.size() + fl - 1) / fl;
  std::vector<double> ms(frames);
  double loudest = 0.0;
  for (size_t f = 0; f < frames; ++f) {
    const size_t begin = f * fl;
    const size_t len = std::min(fl, x.size() - begin);
    ms[f] = MeanSquare(std::span(x.samples).subspan(begin, len));
    loudest = std::max(loudest, ms[f]);
  }
  const double gate = std::max(cfg.absolute_floor, loudest * std::pow(10.0, cfg.relative_gate_db / 10.0));
  std::vector<bool> active(frames, false);
  int hold = 0;
  for (size_t f = 0; f < frames; ++f) {
    if (ms[f] > gate) {
      active[f] = true;
      hold = cfg.hangover_frames;
    } else if (hold > 0) {
      active[f] = true;
      --hold;
    }
  }
  return active;
}

std::vector<Segment> ClassifySegments(const Waveform& near_speech, const Waveform& echo,
                                      const SegmenterConfig& cfg) {
  if (near_speech.size() != echo.size()) throw DataError("segments: length mismatch");
  if (cfg.frame_samples < 1) throw UsageError("segments: frame_samples must be >= 1");
  const std::vector<bool> near = ActivityGate(near_speech, cfg);
  const std::vector<bool> far = ActivityGate(echo, cfg);
  std::vector<Segment> out(near.size());
  for (size_t f = 0; f < near.size(); ++f) {
    if (near[f] && far[f]) out[f] = Segment::kDoubleTalk;
    else if (near[f]) out[f] = Segment::kNearSingleTalk;
    else if (far[f]) out[f] = Segment::kFarSingleTalk;
    else out[f] = Segment::kSilence;
  }
  return out;
}

MetricReport RunMetrics(const Waveform& mic, const Waveform& enhanced,
                        const std::optional<Waveform>& near_speech,
                        const std::optional<Waveform>& echo, const SegmenterConfig& cfg) {
  if (mic.size() != enhanced.size()) {
    throw DataError("metrics: microphone and enhanced lengths differ (" +
                    std::to_string(mic.size()) + " vs " + std::to_string(enhanced.size()) + ")");
  }
  MetricReport r;
  r.samples = static_cast<int64_t>(enhanced.size());
  r.output_rms = std::sqrt(MeanSquare(enhanced.samples));
  r.input_rms = std::sqrt(MeanSquare(mic.samples));
  for (double v : enhanced.samples) r.output_peak = std::max(r.output_peak, std::abs(v));
  if (!near_speech) {
    r.notes.push_back("no near-end ground truth; signal statistics only");
    return r;
  }
  const Waveform& s = *near_speech;
  if (s.size() != mic.size()) throw DataError("metrics: ground truth length differs");
  r.has_truth = true;
  const Waveform y = echo ? *echo : Waveform::Zeros(s.size());
  if (y.size() != s.size()) throw DataError("metrics: echo length differs");

  if (Energy(s.samples) > 0.0) {
    r.si_snr_db = SiSnr(enhanced, s);
    r.input_si_snr_db = SiSnr(mic, s);
  } else {
    r.notes.push_back("near-end speech is silent; SI-SNR undefined");
  }

  const std::vector<Segment> labels = ClassifySegments(s, y, cfg);
  const size_t fl = static_cast<size_t>(cfg.frame_samples);
  for (Segment seg : {Segment::kNearSingleTalk, Segment::kFarSingleTalk, Segment::kDoubleTalk}) {
    std::vector<double> ref, out, in;
    for (size_t f = 0; f < labels.size(); ++f) {
      if (labels[f] != seg) continue;
      const size_t end = std::min(s.size(), (f + 1) * fl);
      for (size_t i = f * fl; i < end; ++i) {
        ref.push_back(s.samples[i]);
        out.push_back(enhanced.samples[i]);
        in.push_back(mic.samples[i]);
      }
    }
    SegmentMetrics m;
    m.segment = seg;
    m.samples = static_cast<int64_t>(ref.size());
    if (seg == Segment::kFarSingleTalk) {
      if (!ref.empty()) m.erle_db = Erle(in, out);
    } else if (Energy(ref) > 0.0) {
      m.si_snr_db = SiSnr(out, ref);
      m.input_si_snr_db = SiSnr(in, ref);
    }
    r.segments.push_back(m);
  }
  return r;
}

std::string ReportToJson(const MetricReport& r) {
  json segments = json::object();
  for (const SegmentMetrics& m : r.segments) {
    json j = {{"samples", m.samples}};
    if (m.segment == Segment::kFarSingleTalk) {
      j["erle_db"] = OrNull(m.erle_db);
    } else {
      j["si_snr_db"] = OrNull(m.si_snr_db);
      j["input_si_snr_db"] = OrNull(m.input_si_snr_db);
    }
    segments[SegmentName(m.segment)] = j;
  }
  const json doc = {
      {"samples", r.samples},
      {"has_truth", r.has_truth},
      {"signal",
       {{"output_rms", r.output_rms}, {"output_peak", r.output_peak}, {"input_rms", r.input_rms}}},
      {"si_snr_db", {{"output", OrNull(r.si_snr_db)}, {"input", OrNull(r.input_si_snr_db)}}},
      {"segments", segments},
      {"notes", r.notes}};
  return doc.dump(2);
}

}  // namespace aecns
