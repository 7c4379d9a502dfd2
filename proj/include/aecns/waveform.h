// Copyright 2026 The aecns Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef AECNS_WAVEFORM_H_
#define AECNS_WAVEFORM_H_

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

namespace aecns {

constexpr int kSampleRate = 16000;

// Mono signal. Every pipeline signal (near, far, echo, error, output) uses
// this type at 16 kHz.
struct Waveform {
  std::vector<double> samples;
  int sample_rate = kSampleRate;

  Waveform() = default;
  explicit Waveform(std::vector<double> s, int rate = kSampleRate)
      : samples(std::move(s)), sample_rate(rate) {}
  static Waveform Zeros(size_t n) { return Waveform(std::vector<double>(n, 0.0)); }

  size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }
  std::span<const double> view() const { return samples; }
  double duration_s() const {
    return static_cast<double>(samples.size()) / sample_rate;
  }
};

using Complex = std::complex<double>;
using Spectrum = std::vector<Complex>;

// Half spectrum (fft_size / 2 + 1 bins) of one analysis frame.
struct SpectralFrame {
  Spectrum bins;
  int64_t frame_index = 0;
};

// Throws DataError naming `what` if any sample is NaN or infinite.
void RequireFinite(std::span<const double> x, const char* what);

double Energy(std::span<const double> x);
double MeanSquare(std::span<const double> x);

}  // namespace aecns

#endif  // AECNS_WAVEFORM_H_
