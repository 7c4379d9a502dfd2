// Copyright 2026 The aecns Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "aecns/scene.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>

#include "aecns/error.h"
#include "aecns/stft.h"

namespace aecns {
namespace {

constexpr double kPi = std::numbers::pi;

void Normalize(std::vector<double>& x, double rms) {
  const double ms = MeanSquare(x);
  if (ms <= 0.0) return;
  const double g = rms / std::sqrt(ms);
  for (double& v : x) v *= g;
}

// Two-pole resonator with roughly unit peak gain.
class Resonator {
 public:
  Resonator(double freq_hz, double bandwidth_hz) {
    const double r = std::exp(-kPi * bandwidth_hz / kSampleRate);
    a1_ = 2.0 * r * std::cos(2.0 * kPi * freq_hz / kSampleRate);
    a2_ = -r * r;
    b0_ = 1.0 - r;
  }
  double Step(double x) {
    const double y = b0_ * x + a1_ * y1_ + a2_ * y2_;
    y2_ = y1_;
    y1_ = y;
    return y;
  }

 private:
  double a1_, a2_, b0_;
  double y1_ = 0.0, y2_ = 0.0;
};

size_t Samples(double seconds) {
  return static_cast<size_t>(std::llround(seconds * kSampleRate));
}

void RequireRir(const Rir& rir, const char* what) {
  if (rir.taps.empty()) throw DataError(std::string(what) + ": empty impulse response");
  RequireFinite(rir.taps, what);
}

}  // namespace

void RirSpec::Validate() const {
  if (length < 1) throw UsageError("rir: length must be >= 1");
  if (direct_delay < 0 || direct_delay >= length) {
    throw UsageError("rir: direct_delay must be in [0, length)");
  }
  if (!(rt60_s > 0.0)) throw UsageError("rir: rt60_s must be > 0");
  if (!(tail_energy >= 0.0)) throw UsageError("rir: tail_energy must be >= 0");
}

Rir GenerateRir(const RirSpec& spec, Rng& rng) {
  spec.Validate();
  Rir rir;
  rir.taps.assign(spec.length, 0.0);
  rir.taps[spec.direct_delay] = 1.0;
  // Amplitude falls by 60 dB (a factor 1000) after rt60_s.
  const double decay = 3.0 * std::log(10.0) / (spec.rt60_s * kSampleRate);
  double energy = 0.0;
  for (int n = spec.direct_delay + 1; n < spec.length; ++n) {
    rir.taps[n] = rng.Gaussian() * std::exp(-decay * (n - spec.direct_delay));
    energy += rir.taps[n] * rir.taps[n];
  }
  if (energy > 0.0) {
    const double g = std::sqrt(spec.tail_energy / energy);
    for (int n = spec.direct_delay + 1; n < spec.length; ++n) rir.taps[n] *= g;
  }
  return rir;
}

std::vector<double> Convolve(std::span<const double> x, std::span<const double> h) {
  const size_t n = x.size();
  std::vector<double> out(n, 0.0);
  if (n == 0 || h.empty()) return out;
  const size_t m = std::min(h.size(), n);  // taps past n never reach the output
  const size_t nfft = std::max<size_t>(1024, std::bit_ceil(2 * m));
  const size_t block = nfft - m + 1;
  RealFft fft(static_cast<int>(nfft));
  const size_t bins = nfft / 2 + 1;

  std::vector<double> buf(nfft, 0.0);
  std::copy(h.begin(), h.begin() + m, buf.begin());
  Spectrum hf(bins), xf(bins);
  fft.Forward(buf, hf);

  for (size_t start = 0; start < n; start += block) {
    const size_t len = std::min(block, n - start);
    std::fill(buf.begin(), buf.end(), 0.0);
    std::copy(x.begin() + start, x.begin() + start + len, buf.begin());
    fft.Forward(buf, xf);
    for (size_t k = 0; k < bins; ++k) xf[k] *= hf[k];
    fft.Inverse(xf, buf);
    const size_t end = std::min(n, start + nfft);
    for (size_t i = start; i < end; ++i) out[i] += buf[i - start];
  }
  return out;
}

Waveform SynthesizeEcho(const Waveform& x, const Rir& rir) {
  if (x.empty()) throw DataError("synthesize_echo: empty far-end signal");
  RequireRir(rir, "synthesize_echo");
  return Waveform(Convolve(x.samples, rir.taps));
}

Waveform SpeechLikeSource(size_t n, Rng& rng, double rms) {
  std::vector<double> out(n, 0.0);
  size_t pos = Samples(rng.Uniform(0.0, 0.3));
  std::vector<double> seg;
  while (pos < n) {
    const size_t len = Samples(rng.Uniform(0.08, 0.32));
    const bool voiced = rng.Bernoulli(0.8);
    const double amp = rng.Uniform(0.4, 1.0);
    seg.assign(len, 0.0);
    if (voiced) {
      Resonator f1(rng.Uniform(300.0, 850.0), 60.0);
      Resonator f2(rng.Uniform(850.0, 2400.0), 90.0);
      Resonator f3(rng.Uniform(2300.0, 3300.0), 150.0);
      // Glottal tilt on the noise excitation.
      const double tilt = rng.Uniform(0.5, 0.9);
      double e = 0.0;
      for (size_t i = 0; i < len; ++i) {
        e = tilt * e + rng.Gaussian();
        const double v = f1.Step(e);
        seg[i] = f3.Step(f2.Step(v) * 4.0 + v);
      }
    } else {
      Resonator hiss(rng.Uniform(3500.0, 6000.0), 1500.0);
      double prev = 0.0;
      for (size_t i = 0; i < len; ++i) {
        const double g = rng.Gaussian();
        seg[i] = hiss.Step(g - prev);
        prev = g;
      }
    }
    Normalize(seg, amp);
    for (size_t i = 0; i < len && pos + i < n; ++i) {
      const double env = 0.5 - 0.5 * std::cos(2.0 * kPi * (i + 0.5) / len);
      out[pos + i] += seg[i] * env;
    }
    const bool long_pause = rng.Bernoulli(0.15);
    pos += len + Samples(long_pause ? rng.Uniform(0.3, 0.9) : rng.Uniform(0.03, 0.25));
  }
  Normalize(out, rms);
  return Waveform(std::move(out));
}

Waveform ColoredNoiseSource(size_t n, Rng& rng, double rms) {
  std::vector<double> out(n);
  const double pole = rng.Uniform(0.0, 0.95);
  const double drift_hz = rng.Uniform(0.1, 0.5);
  const double drift_phase = rng.Uniform(0.0, 2.0 * kPi);
  double state = 0.0;
  for (size_t i = 0; i < n; ++i) {
    state = pole * state + rng.Gaussian();
    out[i] = state * (1.0 + 0.3 * std::sin(2.0 * kPi * drift_hz * i / kSampleRate + drift_phase));
  }
  Normalize(out, rms);
  return Waveform(std::move(out));
}

Waveform WhiteNoiseSource(size_t n, Rng& rng, double rms) {
  std::vector<double> out(n);
  for (double& v : out) v = rng.Gaussian();
  Normalize(out, rms);
  return Waveform(std::move(out));
}

const char* SourceKindName(SourceKind kind) {
  switch (kind) {
    case SourceKind::kSpeech:
      return "speech";
    case SourceKind::kColoredNoise:
      return "noise";
    case SourceKind::kWhiteNoise:
      return "white";
  }
  return "?";
}

SourceKind ParseSourceKind(const std::string& name) {
  for (SourceKind k : {SourceKind::kSpeech, SourceKind::kColoredNoise, SourceKind::kWhiteNoise}) {
    if (name == SourceKindName(k)) return k;
  }
  throw UsageError("unknown source kind '" + name + "' (speech, noise, white)");
}

Waveform MakeSource(SourceKind kind, size_t n, Rng& rng) {
  switch (kind) {
    case SourceKind::kSpeech:
      return SpeechLikeSource(n, rng);
    case SourceKind::kColoredNoise:
      return ColoredNoiseSource(n, rng);
    case SourceKind::kWhiteNoise:
      break;
  }
  return WhiteNoiseSource(n, rng);
}

Waveform AdjustLength(const Waveform& src, size_t n, LengthMode mode, Rng& rng) {
  if (src.empty()) throw DataError("adjust_length: empty source");
  std::vector<double> out(n, 0.0);
  if (src.size() >= n) {
    const size_t offset = rng.Index(src.size() - n + 1);
    std::copy_n(src.samples.begin() + offset, n, out.begin());
  } else if (mode == LengthMode::kSpeech) {
    std::copy(src.samples.begin(), src.samples.end(), out.begin());
  } else {
    for (size_t i = 0; i < n; ++i) out[i] = src.samples[i % src.size()];
  }
  return Waveform(std::move(out));
}

std::pair<Waveform, Waveform> AdjustEchoPair(const Waveform& far, const Waveform& echo,
                                             size_t n, Rng& rng) {
  if (far.size() != echo.size()) {
    throw DataError("adjust_length: far-end and echo lengths differ");
  }
  if (far.empty()) throw DataError("adjust_length: empty source");
  size_t offset = 0;
  if (far.size() > n) offset = rng.Index(far.size() - n + 1);
  auto cut = [&](const Waveform& w) {
    std::vector<double> out(n, 0.0);
    const size_t len = std::min(n, w.size() - offset);
    std::copy_n(w.samples.begin() + offset, len, out.begin());
    return Waveform(std::move(out));
  };
  return {cut(far), cut(echo)};
}

size_t SceneSpec::num_samples() const { return Samples(duration_s); }

int SceneSpec::far_delay_samples() const {
  return static_cast<int>(std::llround(far_delay_ms * kSampleRate / 1000.0));
}

void SceneSpec::Validate() const {
  if (!(duration_s > 0.0) || num_samples() == 0) throw UsageError("scene: duration must be > 0");
  if (!std::isfinite(snr_db) || !std::isfinite(ser_db)) {
    throw UsageError("scene: snr_db and ser_db must be finite");
  }
  for (double p : {noise_silence_prob, echo_silence_prob}) {
    if (!(p >= 0.0 && p <= 1.0)) throw UsageError("scene: probabilities must be in [0, 1]");
  }
  if (!(far_delay_ms >= 0.0) || !std::isfinite(far_delay_ms)) {
    throw UsageError("scene: far_delay_ms must be >= 0");
  }
  if (!(length_jitter >= 0.0 && length_jitter < 1.0)) {
    throw UsageError("scene: length_jitter must be in [0, 1)");
  }
  near_rir.Validate();
  echo_rir.Validate();
}

Scene MixScene(const SceneSpec& spec, const Waveform& s, const Waveform& w, const Waveform& x,
               const Rir& near_rir, const Rir& echo_rir, Rng& rng) {
  spec.Validate();
  const size_t n = spec.num_samples();
  for (const Waveform* src : {&s, &w, &x}) {
    if (src->size() != n) {
      throw DataError("mix_scene: source length " + std::to_string(src->size()) +
                      " != scene length " + std::to_string(n));
    }
  }
  RequireRir(near_rir, "mix_scene near-end");
  RequireRir(echo_rir, "mix_scene echo");

  Scene scene;
  SceneTruth& truth = scene.truth;
  truth.spec = spec;
  truth.near_rir = near_rir;
  truth.far_delay_samples = spec.far_delay_samples();
  // Drawn first so the rates do not depend on anything else in the scene.
  truth.noise_silenced = rng.Bernoulli(spec.noise_silence_prob);
  truth.echo_silenced = rng.Bernoulli(spec.echo_silence_prob);

  if (spec.near_active) {
    if (Energy(s.samples) <= 0.0) throw DataError("mix_scene: near-end speech is silent");
    scene.s_dry = s;
    scene.s = SynthesizeEcho(s, near_rir);
    truth.reference_power = MeanSquare(scene.s.samples);
    if (truth.reference_power <= 0.0) {
      throw DataError("mix_scene: reverberant near-end speech is silent");
    }
  } else {
    scene.s_dry = Waveform::Zeros(n);
    scene.s = Waveform::Zeros(n);
    truth.reference_power = kNominalSpeechPower;
  }

  scene.w = Waveform::Zeros(n);
  if (spec.noise_active) {
    const double pw = MeanSquare(w.samples);
    if (pw <= 0.0) throw DataError("mix_scene: noise source is silent");
    const double g = std::sqrt(truth.reference_power / (pw * std::pow(10.0, spec.snr_db / 10.0)));
    if (!truth.noise_silenced) {
      for (size_t i = 0; i < n; ++i) scene.w.samples[i] = g * w.samples[i];
    }
  }

  scene.x = Waveform::Zeros(n);
  scene.y = Waveform::Zeros(n);
  truth.echo_rir = echo_rir;
  if (spec.far_active) {
    if (Energy(x.samples) <= 0.0) throw DataError("mix_scene: far-end source is silent");
    std::vector<double> delayed(n, 0.0);
    const size_t lag = std::min<size_t>(truth.far_delay_samples, n);
    std::copy_n(x.samples.begin(), n - lag, delayed.begin() + lag);
    std::vector<double> echo = Convolve(delayed, echo_rir.taps);
    const double py = MeanSquare(echo);
    if (py <= 0.0) throw DataError("mix_scene: echo is silent (delay past the scene end?)");
    const double g = std::sqrt(truth.reference_power / (py * std::pow(10.0, spec.ser_db / 10.0)));
    for (double& t : truth.echo_rir.taps) t *= g;
    if (!truth.echo_silenced) {
      // Convolution is linear, so scaling the output equals convolving with
      // the scaled taps up to rounding.
      for (double& v : echo) v *= g;
      scene.x = x;
      scene.y = Waveform(std::move(echo));
    }
  }

  scene.d = Waveform::Zeros(n);
  for (size_t i = 0; i < n; ++i) {
    scene.d.samples[i] = scene.s.samples[i] + scene.y.samples[i] + scene.w.samples[i];
  }
  return scene;
}

Scene GenerateScene(const SceneSpec& spec) {
  spec.Validate();
  Rng rng(spec.seed);
  const size_t n = spec.num_samples();
  auto raw_length = [&] {
    const double f = rng.Uniform(1.0 - spec.length_jitter, 1.0 + spec.length_jitter);
    return std::max<size_t>(1, static_cast<size_t>(std::llround(f * n)));
  };
  const Waveform s = AdjustLength(SpeechLikeSource(raw_length(), rng), n, LengthMode::kSpeech, rng);
  const Waveform w =
      AdjustLength(MakeSource(spec.noise_source, raw_length(), rng), n, LengthMode::kNoise, rng);
  const Waveform x =
      AdjustLength(MakeSource(spec.far_source, raw_length(), rng), n, LengthMode::kSpeech, rng);
  const Rir near_rir = GenerateRir(spec.near_rir, rng);
  const Rir echo_rir = GenerateRir(spec.echo_rir, rng);
  return MixScene(spec, s, w, x, near_rir, echo_rir, rng);
}

void SceneRanges::Validate() const {
  if (!(duration_s > 0.0)) throw UsageError("scene ranges: duration must be > 0");
  for (const Range* r : {&snr_db, &ser_db, &far_delay_ms, &near_rt60_s, &echo_rt60_s}) {
    if (!(r->lo <= r->hi) || !std::isfinite(r->lo) || !std::isfinite(r->hi)) {
      throw UsageError("scene ranges: each range needs finite lo <= hi");
    }
  }
  if (far_delay_ms.lo < 0.0) throw UsageError("scene ranges: far_delay_ms must be >= 0");
  if (near_rt60_s.lo <= 0.0 || echo_rt60_s.lo <= 0.0) {
    throw UsageError("scene ranges: rt60 must be > 0");
  }
  for (double p : {noise_silence_prob, echo_silence_prob}) {
    if (!(p >= 0.0 && p <= 1.0)) throw UsageError("scene ranges: probabilities must be in [0, 1]");
  }
  if (rir_length < 1) throw UsageError("scene ranges: rir_length must be >= 1");
  if (far_speech_weight < 0.0 || far_white_weight < 0.0 ||
      far_speech_weight + far_white_weight <= 0.0) {
    throw UsageError("scene ranges: source weights must be >= 0 and not all zero");
  }
}

SceneSpec SampleSpec(const SceneRanges& ranges, uint64_t seed) {
  ranges.Validate();
  Rng rng(seed);
  SceneSpec spec;
  spec.duration_s = ranges.duration_s;
  spec.snr_db = ranges.snr_db.Draw(rng);
  spec.ser_db = ranges.ser_db.Draw(rng);
  spec.noise_silence_prob = ranges.noise_silence_prob;
  spec.echo_silence_prob = ranges.echo_silence_prob;
  spec.far_delay_ms = ranges.far_delay_ms.Draw(rng);
  spec.near_rir.length = ranges.rir_length;
  spec.near_rir.rt60_s = ranges.near_rt60_s.Draw(rng);
  spec.near_rir.direct_delay = std::min(ranges.rir_length - 1, static_cast<int>(rng.Index(160)));
  spec.echo_rir.length = ranges.rir_length;
  spec.echo_rir.rt60_s = ranges.echo_rt60_s.Draw(rng);
  spec.echo_rir.direct_delay = std::min(ranges.rir_length - 1, static_cast<int>(rng.Index(160)));
  spec.near_active = ranges.near_active;
  spec.noise_active = ranges.noise_active;
  spec.far_active = ranges.far_active;
  const double total = ranges.far_speech_weight + ranges.far_white_weight;
  spec.far_source = rng.Uniform() * total < ranges.far_speech_weight ? SourceKind::kSpeech
                                                                     : SourceKind::kWhiteNoise;
  spec.seed = rng.Bits();
  return spec;
}

}  // namespace aecns
