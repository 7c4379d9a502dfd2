// Copyright 2026 The aecns Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef AECNS_MCTCN_MODEL_H_
#define AECNS_MCTCN_MODEL_H_

#include <memory>
#include <vector>

#include "aecns/mctcn/config.h"
#include "aecns/mctcn/layers.h"
#include "aecns/mctcn/weights.h"
#include "aecns/waveform.h"

namespace aecns::mctcn {

// Floor added to magnitudes before the log.
constexpr double kLogFloor = 1e-7;
// Largest mask gain applied in post-processing. tanh rounds to exactly 1.0
// in double for |M| > ~19, so the gain is capped just below.
constexpr double kMaxMaskGain = 1.0 - 1e-15;

// Causal history of every convolution unit in one core, zeros at start.
class CoreState {
 public:
  CoreState() = default;

  bool initialized() const { return initialized_; }
  int64_t frames() const { return frames_; }
  const std::vector<FrameHistory>& histories() const { return histories_; }

 private:
  friend class MagnitudeCore;
  friend class ComplexCore;

  bool initialized_ = false;
  int64_t frames_ = 0;
  std::vector<FrameHistory> histories_;  // 3 per block
};

struct MaskPair {
  Vector mag_mask;   // first core, each value in (0, 1)
  Vector real_mask;  // second core
  Vector imag_mask;
};

struct Block {
  ConvUnit unit[3];
};

struct ComplexBlock {
  ComplexConvUnit unit[3];
};

class MagnitudeCore {
 public:
  static MagnitudeCore Load(const ModelWeights& w, const ModelConfig& cfg);

  CoreState NewState() const;
  // One frame of log magnitudes in, mask in (0, 1) out. Throws
  // InvariantError on a state not created by NewState().
  Vector Forward(const Vector& log_mag_e, const Vector& log_mag_y,
                 CoreState& state) const;

 private:
  ModelConfig cfg_;
  FcCustom in_e_;
  FcCustom in_y_;
  std::vector<Block> blocks_;
  Linear out_;
};

class ComplexCore {
 public:
  static ComplexCore Load(const ModelWeights& w, const ModelConfig& cfg);

  CoreState NewState() const;
  // Returns (real mask, imaginary mask).
  std::pair<Vector, Vector> Forward(const ComplexVector& masked, const ComplexVector& echo,
                                    CoreState& state) const;

 private:
  ModelConfig cfg_;
  ComplexFcCustom in_e_;
  ComplexFcCustom in_y_;
  std::vector<ComplexBlock> blocks_;
  Linear out_re_;
  Linear out_im_;
};

Vector LogMagnitude(const Spectrum& x);
ComplexVector ToComplexVector(const Spectrum& x);

// S = s_mag * tanh(|M|) * exp(j (phase(e) + phase(M))), atan2(0, 0) = 0.
Spectrum PostProcess(const Vector& s_mag, const Vector& phase, const Vector& real_mask,
                     const Vector& imag_mask);

struct ModelState {
  CoreState magnitude;
  CoreState complex;
};

struct ModelOutput {
  MaskPair masks;
  Vector s_mag;       // first-core magnitude estimate
  Spectrum enhanced;  // post-processed frame
};

// Both cores plus post-processing, one STFT frame at a time. Immutable after
// construction; state lives in ModelState.
class MctcnModel {
 public:
  MctcnModel(const ModelWeights& weights, const ModelConfig& cfg);

  const ModelConfig& config() const { return cfg_; }
  ModelState NewState() const;
  // `error` is the STFT of the filter output e(n), `echo` of the echo
  // estimate.
  ModelOutput Process(const Spectrum& error, const Spectrum& echo, ModelState& state) const;

 private:
  ModelConfig cfg_;
  MagnitudeCore magnitude_;
  ComplexCore complex_;
};

}  // namespace aecns::mctcn

#endif  // AECNS_MCTCN_MODEL_H_
