// Copyright 2026 The aecns Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef AECNS_STFT_H_
#define AECNS_STFT_H_

#include <memory>
#include <span>
#include <vector>

#include "aecns/waveform.h"

namespace aecns {

// Real-input FFT of a fixed even size. Forward is unnormalized and returns
// size/2 + 1 bins; Inverse consumes size/2 + 1 bins and scales by 1/size.
class RealFft {
 public:
  explicit RealFft(int size);
  ~RealFft();
  RealFft(RealFft&&) noexcept;
  RealFft& operator=(RealFft&&) noexcept;

  int size() const { return size_; }
  int num_bins() const { return size_ / 2 + 1; }

  void Forward(std::span<const double> in, std::span<Complex> out);
  void Inverse(std::span<const Complex> in, std::span<double> out);

 private:
  struct Impl;
  int size_;
  std::unique_ptr<Impl> impl_;
};

struct StftConfig {
  int fft_size = 512;
  int hop = 256;

  int num_bins() const { return fft_size / 2 + 1; }
  // Throws UsageError unless hop == fft_size / 2 and fft_size is even.
  void Validate() const;
};

// Periodic Hann window, w[n] = 0.5 - 0.5 cos(2 pi n / N).
std::vector<double> HannWindow(int size);

// Sum of the analysis windows overlapping any sample in steady state. Equal
// to 1 for periodic Hann at 50% hop; Istft divides by it.
double OverlapAddGain(const StftConfig& cfg);

// Frame t covers samples [t * hop, t * hop + fft_size). The trailing
// partial frame is zero-padded; nothing is padded before sample 0.
std::vector<SpectralFrame> Stft(const Waveform& x, const StftConfig& cfg = {});

// Overlap-add resynthesis. Output length is (T - 1) * hop + fft_size.
// Reconstruction is exact wherever two frames overlap, i.e. on
// [hop, (T - 1) * hop + hop).
Waveform Istft(const std::vector<SpectralFrame>& frames,
               const StftConfig& cfg = {});

// Time-domain energy of the windowed segment recovered through Parseval
// from a half spectrum of an fft_size-point transform.
double FrameEnergy(const Spectrum& bins, int fft_size);

// Streaming analysis. Each Push of `hop` samples yields one frame built from
// the previous hop (zeros before the first call) and the new one.
class StreamingStft {
 public:
  explicit StreamingStft(const StftConfig& cfg = {});
  SpectralFrame Push(std::span<const double> hop_samples);
  void Reset();

 private:
  StftConfig cfg_;
  std::vector<double> window_;
  std::vector<double> buffer_;
  RealFft fft_;
  int64_t next_index_ = 0;
};

// Streaming synthesis: each Push of one frame emits `hop` finished samples.
class StreamingOverlapAdd {
 public:
  explicit StreamingOverlapAdd(const StftConfig& cfg = {});
  std::vector<double> Push(const Spectrum& bins);
  void Reset();

 private:
  StftConfig cfg_;
  double gain_;
  std::vector<double> tail_;
  std::vector<double> frame_;
  RealFft fft_;
};

}  // namespace aecns

#endif  // AECNS_STFT_H_
