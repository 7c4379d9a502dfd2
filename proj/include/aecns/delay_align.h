// Copyright 2026 The aecns Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef AECNS_DELAY_ALIGN_H_
#define AECNS_DELAY_ALIGN_H_

#include <cstdint>
#include <deque>
#include <span>
#include <vector>

#include "aecns/stft.h"
#include "aecns/waveform.h"

namespace aecns {

struct DelayAlignConfig {
  int peaks_per_frame = 6;
  // Compensation is applied only for lags strictly above this (250 ms).
  int threshold_samples = 4000;
  int max_lag_samples = 16000;
  int hop = 256;
  // Near-end patterns scored per update (~1 s).
  int history_frames = 62;
  // A challenger lag must score this much better, relative to the current
  // lag, on `switch_updates` consecutive updates before it is adopted. Once the
  // current lag has scored at least `score_floor`, updates whose near frame
  // lines up with far-end silence at the current lag do not count.
  double switch_margin = 0.10;
  int switch_updates = 5;
  // Below this best score the previous estimate is held.
  double score_floor = 0.1;
  // Mean-square level of the analysed segment under which a frame is silent.
  double silence_floor = 1e-6;
  // DelayAligner shifts the reference by this much less than the estimate
  // so a lag rounded up to the next hop still leaves a causal echo path.
  int guard_samples = 256;

  int max_lag_hops() const { return max_lag_samples / hop; }
  void Validate() const;
};

// Spectral-peak fingerprint of one frame: bins of up to P local maxima,
// strongest first.
struct PeakPattern {
  int64_t frame_index = 0;
  std::vector<int> peak_bins;
};

struct DelayEstimate {
  int lag_samples = 0;
  // Match score of the reported lag: the fraction of near-end peaks found in
  // the lag-shifted far-end patterns over the history window.
  double confidence = 0.0;
  int64_t frame_index = 0;
  // Set while fewer than history_frames near patterns have been seen.
  bool provisional = true;
};

// Local maxima strictly above both neighbours (DC and Nyquist excluded),
// ranked by magnitude. Returns an empty pattern when the frame's mean-square
// segment level (Parseval, Hann power normalized) is below `silence_floor`.
PeakPattern ExtractPattern(const SpectralFrame& frame, int max_peaks,
                           double silence_floor = 1e-6);

// Match score for every lag 0..max_lag_hops. near_history and far_history
// are aligned: element i of each was taken at the same hop, newest last.
// Only the newest `window` near patterns are scored. Returns all zeros when
// the window holds no near-end peaks.
std::vector<double> ScoreLags(std::span<const PeakPattern> near_history,
                              std::span<const PeakPattern> far_history,
                              int max_lag_hops, int window);

// Stateful estimator: one Update per hop, holding the pattern histories and
// the hysteresis state.
class DelayEstimator {
 public:
  explicit DelayEstimator(const DelayAlignConfig& cfg = {});

  DelayEstimate Update(PeakPattern near, PeakPattern far);
  const DelayEstimate& current() const { return current_; }
  void Reset();

 private:
  DelayAlignConfig cfg_;
  std::deque<PeakPattern> near_;
  std::deque<PeakPattern> far_;
  DelayEstimate current_;
  int current_lag_hops_ = 0;
  int challenger_hops_ = -1;
  int challenger_count_ = 0;
  // Some lag has held at least score_floor since the last reset.
  bool locked_ = false;
  int64_t updates_ = 0;
};

// Returns x(n - lag) (zero-prefixed, same length) when the estimate exceeds
// the threshold; otherwise x unchanged.
Waveform ApplyCompensation(const Waveform& x, const DelayEstimate& est,
                           int threshold_samples = 4000);

// Lag that ApplyCompensation would use: est.lag_samples or 0.
int CompensationLag(const DelayEstimate& est, int threshold_samples = 4000);

// Streaming front end: per hop it fingerprints both signals, updates the
// estimate and emits the far-end reference delayed by the compensation lag.
class DelayAligner {
 public:
  explicit DelayAligner(const DelayAlignConfig& cfg = {});

  struct HopResult {
    DelayEstimate estimate;
    int applied_lag = 0;  // CompensationLag of the estimate
    int shift = 0;        // applied_lag - guard_samples, or 0
    std::vector<double> reference;
  };
  HopResult Push(std::span<const double> near_hop, std::span<const double> far_hop);
  void Reset();

 private:
  DelayAlignConfig cfg_;
  StreamingStft near_stft_;
  StreamingStft far_stft_;
  DelayEstimator estimator_;
  // Far-end history, newest sample last; long enough for max lag + one hop.
  std::vector<double> far_buffer_;
};

}  // namespace aecns

#endif  // AECNS_DELAY_ALIGN_H_
