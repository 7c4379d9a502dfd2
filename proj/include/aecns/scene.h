// Copyright 2026 The aecns Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef AECNS_SCENE_H_
#define AECNS_SCENE_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "aecns/random.h"
#include "aecns/waveform.h"

namespace aecns {

struct Rir {
  std::vector<double> taps;
};

// Unit direct path at `direct_delay` followed by exponentially decaying
// Gaussian noise reaching -60 dB after rt60_s, scaled so the tail carries
// tail_energy times the direct-path energy.
struct RirSpec {
  int length = 4608;
  double rt60_s = 0.3;
  int direct_delay = 32;
  double tail_energy = 0.5;

  void Validate() const;
};

Rir GenerateRir(const RirSpec& spec, Rng& rng);

// Causal convolution truncated to x.size(), computed by FFT overlap-add.
std::vector<double> Convolve(std::span<const double> x, std::span<const double> h);

// y = rir * x, same length as x. Throws DataError on empty inputs.
Waveform SynthesizeEcho(const Waveform& x, const Rir& rir);

// Voiced syllables (tilted noise through three formant resonators)
// and fricative bursts separated by pauses, normalized to `rms`.
Waveform SpeechLikeSource(size_t n, Rng& rng, double rms = 0.05);
// Gaussian noise through a random one-pole low-pass with a slow level
// drift, normalized to `rms`.
Waveform ColoredNoiseSource(size_t n, Rng& rng, double rms = 0.05);
Waveform WhiteNoiseSource(size_t n, Rng& rng, double rms = 0.05);

enum class SourceKind { kSpeech, kColoredNoise, kWhiteNoise };
const char* SourceKindName(SourceKind kind);
// Throws UsageError on an unknown name.
SourceKind ParseSourceKind(const std::string& name);
Waveform MakeSource(SourceKind kind, size_t n, Rng& rng);

enum class LengthMode { kSpeech, kNoise };

// Cuts a random `n`-sample slice out of a longer source. A shorter source is
// zero-padded at the end (speech) or filled by repeating itself from the
// start (noise).
Waveform AdjustLength(const Waveform& src, size_t n, LengthMode mode, Rng& rng);

// Same as kSpeech for both signals with one shared offset, keeping a far-end
// recording and its echo aligned. Throws DataError if lengths differ.
std::pair<Waveform, Waveform> AdjustEchoPair(const Waveform& far, const Waveform& echo,
                                             size_t n, Rng& rng);

// Level reference used for SNR and SER when there is no near-end talker.
constexpr double kNominalSpeechPower = 0.0025;

struct SceneSpec {
  double duration_s = 10.0;
  double snr_db = 15.0;
  double ser_db = 5.0;
  double noise_silence_prob = 0.2;
  double echo_silence_prob = 0.2;
  double far_delay_ms = 0.0;
  uint64_t seed = 0;

  bool near_active = true;
  bool noise_active = true;
  bool far_active = true;
  SourceKind far_source = SourceKind::kSpeech;
  SourceKind noise_source = SourceKind::kColoredNoise;
  // Raw sources are drawn with lengths in duration * [1 - j, 1 + j] and
  // then fitted with AdjustLength.
  double length_jitter = 0.4;
  RirSpec near_rir;
  RirSpec echo_rir;

  size_t num_samples() const;
  int far_delay_samples() const;
  void Validate() const;
};

struct SceneTruth {
  SceneSpec spec;
  Rir near_rir;
  Rir echo_rir;  // includes the SER gain: y == echo_rir * delayed x exactly
  int far_delay_samples = 0;
  bool noise_silenced = false;
  bool echo_silenced = false;
  double reference_power = 0.0;  // mean square SNR/SER are measured against
};

// d == s + y + w sample-wise, with s the reverberant near-end speech.
struct Scene {
  Waveform s_dry;
  Waveform s;
  Waveform w;
  Waveform x;  // far-end reference as the device sees it (not delayed)
  Waveform y;
  Waveform d;
  SceneTruth truth;
};

// Reverberates s, scales w to snr_db and the echo to ser_db against the
// reverberant speech, applies the silence draws, delays the echo path by
// far_delay_ms and sums. All sources must already be num_samples long.
// Throws DataError if an active source has zero energy.
Scene MixScene(const SceneSpec& spec, const Waveform& s, const Waveform& w, const Waveform& x,
               const Rir& near_rir, const Rir& echo_rir, Rng& rng);

// Sources, RIRs and silence draws all come from Rng(spec.seed).
Scene GenerateScene(const SceneSpec& spec);

struct Range {
  double lo = 0.0;
  double hi = 0.0;
  double Draw(Rng& rng) const { return lo == hi ? lo : rng.Uniform(lo, hi); }
};

// Distribution over SceneSpecs. Defaults reproduce the published
// augmentation ranges.
struct SceneRanges {
  double duration_s = 10.0;
  Range snr_db{5.0, 25.0};
  Range ser_db{-5.0, 20.0};
  double noise_silence_prob = 0.2;
  double echo_silence_prob = 0.2;
  Range far_delay_ms{0.0, 1000.0};
  Range near_rt60_s{0.2, 0.6};
  Range echo_rt60_s{0.2, 0.6};
  int rir_length = 4608;
  bool near_active = true;
  bool noise_active = true;
  bool far_active = true;
  // Relative weights for picking the far-end source kind.
  double far_speech_weight = 1.0;
  double far_white_weight = 0.0;

  void Validate() const;
};

SceneSpec SampleSpec(const SceneRanges& ranges, uint64_t seed);

}  // namespace aecns

#endif  // AECNS_SCENE_H_
