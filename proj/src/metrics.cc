// Copyright 2026 The aecns Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "aecns/metrics.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "aecns/error.h"

namespace aecns {
namespace {

double ClampDb(double db) {
  if (std::isnan(db)) return -kMetricClampDb;
  return std::clamp(db, -kMetricClampDb, kMetricClampDb);
}

double RatioDb(double num, double den) {
  if (den <= 0.0) return num > 0.0 ? kMetricClampDb : -kMetricClampDb;
  if (num <= 0.0) return -kMetricClampDb;
  return ClampDb(10.0 * std::log10(num / den));
}

}  // namespace

double SiSnr(std::span<const double> estimate, std::span<const double> reference) {
  if (estimate.size() != reference.size()) {
    throw DataError("si_snr: length mismatch (" + std::to_string(estimate.size()) +
                    " vs " + std::to_string(reference.size()) + ")");
  }
  const double ref_energy = Energy(reference);
  if (ref_energy <= 0.0) throw DataError("si_snr: reference has zero energy");

  double dot = 0.0;
  for (size_t i = 0; i < reference.size(); ++i) dot += estimate[i] * reference[i];
  const double scale = dot / ref_energy;
  double target = 0.0;
  double noise = 0.0;
  for (size_t i = 0; i < reference.size(); ++i) {
    const double t = scale * reference[i];
    const double e = estimate[i] - t;
    target += t * t;
    noise += e * e;
  }
  return RatioDb(target, noise);
}

double Erle(std::span<const double> mic, std::span<const double> residual) {
  if (mic.size() != residual.size()) {
    throw DataError("erle: length mismatch");
  }
  const double res = MeanSquare(residual);
  if (res <= 0.0) return kMetricClampDb;
  return RatioDb(MeanSquare(mic), res);
}

}  // namespace aecns
