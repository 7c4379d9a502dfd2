// Copyright 2026 The aecns Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef AECNS_METRICS_H_
#define AECNS_METRICS_H_

#include <span>

#include "aecns/waveform.h"

namespace aecns {

// Metrics are clamped to +/- this many dB.
constexpr double kMetricClampDb = 100.0;

// Scale-invariant SNR in dB. The estimate is projected onto the reference
// and the residual is whatever the projection leaves out, so any
// positive scaling of either argument leaves the value unchanged.
// Throws DataError on length mismatch or a zero-energy reference.
double SiSnr(std::span<const double> estimate, std::span<const double> reference);
inline double SiSnr(const Waveform& estimate, const Waveform& reference) {
  return SiSnr(estimate.view(), reference.view());
}

// Echo return loss enhancement: 10 log10(mean(mic^2) / mean(residual^2)).
// A silent residual gives the clamp ceiling.
double Erle(std::span<const double> mic, std::span<const double> residual);
inline double Erle(const Waveform& mic, const Waveform& residual) {
  return Erle(mic.view(), residual.view());
}

}  // namespace aecns

#endif  // AECNS_METRICS_H_
