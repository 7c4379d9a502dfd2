// Copyright 2026 The aecns Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "aecns/stft.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <unsupported/Eigen/FFT>

#include "aecns/error.h"

namespace aecns {

struct RealFft::Impl {
  Eigen::FFT<double> fft;
};

RealFft::RealFft(int size) : size_(size), impl_(std::make_unique<Impl>()) {
  if (size < 2 || size % 2 != 0) {
    throw UsageError("RealFft size must be even and >= 2, got " +
                     std::to_string(size));
  }
  impl_->fft.SetFlag(Eigen::FFT<double>::HalfSpectrum);
}

RealFft::~RealFft() = default;
RealFft::RealFft(RealFft&&) noexcept = default;
RealFft& RealFft::operator=(RealFft&&) noexcept = default;

void RealFft::Forward(std::span<const double> in, std::span<Complex> out) {
  if (static_cast<int>(in.size()) != size_ ||
      static_cast<int>(out.size()) != num_bins()) {
    throw InvariantError("RealFft::Forward: buffer size mismatch");
  }
  impl_->fft.fwd(out.data(), in.data(), size_);
}

void RealFft::Inverse(std::span<const Complex> in, std::span<double> out) {
  if (static_cast<int>(in.size()) != num_bins() ||
      static_cast<int>(out.size()) != size_) {
    throw InvariantError("RealFft::Inverse: buffer size mismatch");
  }
  impl_->fft.inv(out.data(), in.data(), size_);
}

void RequireFinite(std::span<const double> x, const char* what) {
  for (size_t i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i])) {
      throw DataError(std::string(what) + ": non-finite sample at index " +
                      std::to_string(i));
    }
  }
}

double Energy(std::span<const double> x) {
  double acc = 0.0;
  for (double v : x) acc += v * v;
  return acc;
}

double MeanSquare(std::span<const double> x) {
  return x.empty() ? 0.0 : Energy(x) / static_cast<double>(x.size());
}

void StftConfig::Validate() const {
  if (fft_size < 2 || fft_size % 2 != 0) {
    throw UsageError("stft: fft_size must be even");
  }
  if (hop * 2 != fft_size) {
    throw UsageError("stft: hop must equal fft_size / 2");
  }
}

std::vector<double> HannWindow(int size) {
  std::vector<double> w(size);
  for (int n = 0; n < size; ++n) {
    w[n] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * n / size);
  }
  return w;
}

double OverlapAddGain(const StftConfig& cfg) {
  cfg.Validate();
  const auto w = HannWindow(cfg.fft_size);
  // Steady state: sample n sees w[n] and w[n + hop]. The periodic Hann sum
  // is the same for every n; take the mean to wash out rounding.
  double acc = 0.0;
  for (int n = 0; n < cfg.hop; ++n) acc += w[n] + w[n + cfg.hop];
  return acc / cfg.hop;
}

double FrameEnergy(const Spectrum& bins, int fft_size) {
  const size_t half = static_cast<size_t>(fft_size / 2);
  if (bins.size() != half + 1) {
    throw DataError("FrameEnergy: expected " + std::to_string(half + 1) +
                    " bins");
  }
  double acc = std::norm(bins[0]) + std::norm(bins[half]);
  for (size_t m = 1; m < half; ++m) acc += 2.0 * std::norm(bins[m]);
  return acc / fft_size;
}

std::vector<SpectralFrame> Stft(const Waveform& x, const StftConfig& cfg) {
  cfg.Validate();
  RequireFinite(x.view(), "stft input");
  std::vector<SpectralFrame> frames;
  if (x.empty()) return frames;

  const size_t n = x.size();
  const size_t fft = static_cast<size_t>(cfg.fft_size);
  const size_t hop = static_cast<size_t>(cfg.hop);
  const size_t num_frames = n <= fft ? 1 : 1 + (n - fft + hop - 1) / hop;

  const auto window = HannWindow(cfg.fft_size);
  RealFft transform(cfg.fft_size);
  std::vector<double> seg(fft);
  frames.reserve(num_frames);
  for (size_t t = 0; t < num_frames; ++t) {
    const size_t start = t * hop;
    for (size_t i = 0; i < fft; ++i) {
      const size_t k = start + i;
      seg[i] = k < n ? x.samples[k] * window[i] : 0.0;
    }
    SpectralFrame frame;
    frame.frame_index = static_cast<int64_t>(t);
    frame.bins.resize(cfg.num_bins());
    transform.Forward(seg, frame.bins);
    frames.push_back(std::move(frame));
  }
  return frames;
}

Waveform Istft(const std::vector<SpectralFrame>& frames, const StftConfig& cfg) {
  cfg.Validate();
  if (frames.empty()) return Waveform();
  for (const auto& f : frames) {
    if (static_cast<int>(f.bins.size()) != cfg.num_bins()) {
      throw DataError("istft: frame " + std::to_string(f.frame_index) +
                      " has " + std::to_string(f.bins.size()) +
                      " bins, expected " + std::to_string(cfg.num_bins()));
    }
  }
  const size_t hop = static_cast<size_t>(cfg.hop);
  const size_t fft = static_cast<size_t>(cfg.fft_size);
  std::vector<double> out((frames.size() - 1) * hop + fft, 0.0);
  RealFft transform(cfg.fft_size);
  std::vector<double> seg(fft);
  const double inv_gain = 1.0 / OverlapAddGain(cfg);
  for (size_t t = 0; t < frames.size(); ++t) {
    transform.Inverse(frames[t].bins, seg);
    double* dst = out.data() + t * hop;
    for (size_t i = 0; i < fft; ++i) dst[i] += seg[i] * inv_gain;
  }
  return Waveform(std::move(out));
}

StreamingStft::StreamingStft(const StftConfig& cfg)
    : cfg_(cfg),
      window_(HannWindow(cfg.fft_size)),
      buffer_(cfg.fft_size, 0.0),
      fft_(cfg.fft_size) {
  cfg_.Validate();
}

SpectralFrame StreamingStft::Push(std::span<const double> hop_samples) {
  if (static_cast<int>(hop_samples.size()) != cfg_.hop) {
    throw DataError("StreamingStft::Push: expected " + std::to_string(cfg_.hop) +
                    " samples");
  }
  std::copy(buffer_.begin() + cfg_.hop, buffer_.end(), buffer_.begin());
  std::copy(hop_samples.begin(), hop_samples.end(), buffer_.begin() + cfg_.hop);
  std::vector<double> seg(cfg_.fft_size);
  for (int i = 0; i < cfg_.fft_size; ++i) seg[i] = buffer_[i] * window_[i];
  SpectralFrame frame;
  frame.frame_index = next_index_++;
  frame.bins.resize(cfg_.num_bins());
  fft_.Forward(seg, frame.bins);
  return frame;
}

void StreamingStft::Reset() {
  std::fill(buffer_.begin(), buffer_.end(), 0.0);
  next_index_ = 0;
}

StreamingOverlapAdd::StreamingOverlapAdd(const StftConfig& cfg)
    : cfg_(cfg),
      gain_(OverlapAddGain(cfg)),
      tail_(cfg.hop, 0.0),
      frame_(cfg.fft_size, 0.0),
      fft_(cfg.fft_size) {}

std::vector<double> StreamingOverlapAdd::Push(const Spectrum& bins) {
  if (static_cast<int>(bins.size()) != cfg_.num_bins()) {
    throw DataError("StreamingOverlapAdd::Push: bad bin count");
  }
  fft_.Inverse(bins, frame_);
  std::vector<double> out(cfg_.hop);
  for (int i = 0; i < cfg_.hop; ++i) {
    out[i] = (tail_[i] + frame_[i]) / gain_;
    tail_[i] = frame_[i + cfg_.hop];
  }
  return out;
}

void StreamingOverlapAdd::Reset() { std::fill(tail_.begin(), tail_.end(), 0.0); }

}  // namespace aecns
