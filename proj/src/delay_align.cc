// Copyright 2026 The aecns Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "aecns/delay_align.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "aecns/error.h"

namespace aecns {

void DelayAlignConfig::Validate() const {
  if (peaks_per_frame < 1) throw UsageError("delay: peaks_per_frame must be >= 1");
  if (hop < 1) throw UsageError("delay: hop must be >= 1");
  if (max_lag_samples < 0 || max_lag_samples > 16000) {
    throw UsageError("delay: max_lag_samples must lie in [0, 16000]");
  }
  if (threshold_samples < 0) throw UsageError("delay: negative threshold");
  if (history_frames < 1) throw UsageError("delay: history_frames must be >= 1");
  if (switch_updates < 1) throw UsageError("delay: switch_updates must be >= 1");
  if (guard_samples < 0) throw UsageError("delay: negative guard");
}

PeakPattern ExtractPattern(const SpectralFrame& frame, int max_peaks,
                           double silence_floor) {
  PeakPattern pattern;
  pattern.frame_index = frame.frame_index;
  const auto& bins = frame.bins;
  if (bins.size() < 3 || max_peaks <= 0) return pattern;

  const int fft_size = static_cast<int>(bins.size() - 1) * 2;
  // Hann power sum is 3N/8, so this is the mean square of the raw segment.
  const double level = FrameEnergy(bins, fft_size) / (0.375 * fft_size);
  if (!(level >= silence_floor)) return pattern;

  std::vector<double> mag(bins.size());
  for (size_t m = 0; m < bins.size(); ++m) mag[m] = std::abs(bins[m]);
  std::vector<int> peaks;
  for (size_t m = 1; m + 1 < bins.size(); ++m) {
    if (mag[m] > mag[m - 1] && mag[m] > mag[m + 1]) peaks.push_back(static_cast<int>(m));
  }
  std::stable_sort(peaks.begin(), peaks.end(),
                   [&](int a, int b) { return mag[a] > mag[b]; });
  if (static_cast<int>(peaks.size()) > max_peaks) peaks.resize(max_peaks);
  pattern.peak_bins = std::move(peaks);
  return pattern;
}

namespace {

int CountCommon(const std::vector<int>& a, const std::vector<int>& b) {
  int n = 0;
  for (int x : a) {
    if (std::find(b.begin(), b.end(), x) != b.end()) ++n;
  }
  return n;
}

}  // namespace

std::vector<double> ScoreLags(std::span<const PeakPattern> near_history,
                              std::span<const PeakPattern> far_history,
                              int max_lag_hops, int window) {
  std::vector<double> scores(static_cast<size_t>(max_lag_hops) + 1, 0.0);
  if (near_history.size() != far_history.size()) {
    throw InvariantError("ScoreLags: histories must be aligned");
  }
  const int n = static_cast<int>(near_history.size());
  const int begin = std::max(0, n - window);
  double total = 0.0;
  for (int t = begin; t < n; ++t) total += near_history[t].peak_bins.size();
  if (total == 0.0) return scores;

  for (int lag = 0; lag <= max_lag_hops; ++lag) {
    int hits = 0;
    for (int t = std::max(begin, lag); t < n; ++t) {
      hits += CountCommon(near_history[t].peak_bins, far_history[t - lag].peak_bins);
    }
    scores[lag] = hits / total;
  }
  return scores;
}

DelayEstimator::DelayEstimator(const DelayAlignConfig& cfg) : cfg_(cfg) {
  cfg_.Validate();
}

void DelayEstimator::Reset() {
  near_.clear();
  far_.clear();
  current_ = DelayEstimate();
  current_lag_hops_ = 0;
  challenger_hops_ = -1;
  challenger_count_ = 0;
  locked_ = false;
  updates_ = 0;
}

DelayEstimate DelayEstimator::Update(PeakPattern near, PeakPattern far) {
  const int max_lag = cfg_.max_lag_hops();
  const size_t capacity = static_cast<size_t>(cfg_.history_frames + max_lag);
  near_.push_back(std::move(near));
  far_.push_back(std::move(far));
  while (near_.size() > capacity) {
    near_.pop_front();
    far_.pop_front();
  }
  ++updates_;

  // deque is not contiguous; copy into spans the scorer can read.
  std::vector<PeakPattern> near_vec(near_.begin(), near_.end());
  std::vector<PeakPattern> far_vec(far_.begin(), far_.end());
  const auto scores = ScoreLags(near_vec, far_vec, max_lag, cfg_.history_frames);

  int best = 0;
  for (int lag = 1; lag <= max_lag; ++lag) {
    if (scores[lag] > scores[best]) best = lag;
  }
  const double held = scores[current_lag_hops_];
  // While the far end was silent at the current lag the newest near frame
  // holds no evidence for it, and a longer lag reaching back to older far-end
  // activity could outvote it before its echo arrives. Until some lag has held
  // support there is nothing to protect, so initial acquisition is not gated.
  const int paired = static_cast<int>(far_vec.size()) - 1 - current_lag_hops_;
  const bool current_silent = paired < 0 || far_vec[paired].peak_bins.empty();
  if (scores[best] < cfg_.score_floor || best == current_lag_hops_) {
    challenger_hops_ = -1;
    challenger_count_ = 0;
  } else if (locked_ && current_silent) {
    // No fresh evidence: hold the challenger count.
  } else if (scores[best] >= (1.0 + cfg_.switch_margin) * held) {
    if (best == challenger_hops_) {
      ++challenger_count_;
    } else {
      challenger_hops_ = best;
      challenger_count_ = 1;
    }
    if (challenger_count_ >= cfg_.switch_updates) {
      current_lag_hops_ = best;
      challenger_hops_ = -1;
      challenger_count_ = 0;
    }
  } else {
    challenger_hops_ = -1;
    challenger_count_ = 0;
  }

  locked_ = locked_ || scores[current_lag_hops_] >= cfg_.score_floor;
  current_.lag_samples = current_lag_hops_ * cfg_.hop;
  current_.confidence = std::clamp(scores[current_lag_hops_], 0.0, 1.0);
  current_.frame_index = updates_ - 1;
  current_.provisional = updates_ < cfg_.history_frames;
  return current_;
}

int CompensationLag(const DelayEstimate& est, int threshold_samples) {
  return est.lag_samples > threshold_samples ? est.lag_samples : 0;
}

Waveform ApplyCompensation(const Waveform& x, const DelayEstimate& est,
                           int threshold_samples) {
  const int lag = CompensationLag(est, threshold_samples);
  if (lag == 0) return x;
  Waveform out = Waveform::Zeros(x.size());
  out.sample_rate = x.sample_rate;
  for (size_t n = static_cast<size_t>(lag); n < x.size(); ++n) {
    out.samples[n] = x.samples[n - lag];
  }
  return out;
}

DelayAligner::DelayAligner(const DelayAlignConfig& cfg)
    : cfg_(cfg),
      near_stft_(StftConfig{cfg.hop * 2, cfg.hop}),
      far_stft_(StftConfig{cfg.hop * 2, cfg.hop}),
      estimator_(cfg),
      far_buffer_(static_cast<size_t>(cfg.max_lag_samples + cfg.hop), 0.0) {}

DelayAligner::HopResult DelayAligner::Push(std::span<const double> near_hop,
                                           std::span<const double> far_hop) {
  const size_t hop = static_cast<size_t>(cfg_.hop);
  if (near_hop.size() != hop || far_hop.size() != hop) {
    throw DataError("DelayAligner::Push: expected " + std::to_string(hop) +
                    " samples per signal");
  }
  HopResult result;
  result.estimate = estimator_.Update(
      ExtractPattern(near_stft_.Push(near_hop), cfg_.peaks_per_frame, cfg_.silence_floor),
      ExtractPattern(far_stft_.Push(far_hop), cfg_.peaks_per_frame, cfg_.silence_floor));

  std::copy(far_buffer_.begin() + hop, far_buffer_.end(), far_buffer_.begin());
  std::copy(far_hop.begin(), far_hop.end(), far_buffer_.end() - hop);

  result.applied_lag = std::min(CompensationLag(result.estimate, cfg_.threshold_samples),
                                cfg_.max_lag_samples);
  result.shift = std::max(0, result.applied_lag - cfg_.guard_samples);
  const auto end = far_buffer_.end() - result.shift;
  result.reference.assign(end - hop, end);
  return result;
}

void DelayAligner::Reset() {
  near_stft_.Reset();
  far_stft_.Reset();
  estimator_.Reset();
  std::fill(far_buffer_.begin(), far_buffer_.end(), 0.0);
}

}  // namespace aecns
