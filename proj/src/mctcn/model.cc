// Copyright 2026 The aecns Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "aecns/mctcn/model.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "aecns/error.h"

namespace aecns::mctcn {
namespace {

void CheckInput(const Vector& x, int bins, const char* what) {
  if (x.size() != bins) {
    throw DataError(std::string(what) + ": expected " + std::to_string(bins) + " bins, got " +
                    std::to_string(x.size()));
  }
}

void CheckState(const CoreState& state) {
  if (!state.initialized()) throw InvariantError("mctcn: core state not initialized");
}

Vector Concat(const Vector& a, const Vector& b) {
  Vector out(a.size() + b.size());
  out << a, b;
  return out;
}

double Sigmoid(double v) {
  // Keep the value strictly inside (0, 1); 1 / (1 + e^-v) saturates in
  // double precision.
  const double s = 1.0 / (1.0 + std::exp(-v));
  return std::clamp(s, std::numeric_limits<double>::min(), 1.0 - 0x1p-53);
}

}  // namespace

MagnitudeCore MagnitudeCore::Load(const ModelWeights& w, const ModelConfig& cfg) {
  cfg.Validate();
  MagnitudeCore core;
  core.cfg_ = cfg;
  core.in_e_ = FcCustom::Load(w, "mag.in_e");
  core.in_y_ = FcCustom::Load(w, "mag.in_y");
  for (int b = 1; b <= cfg.num_blocks; ++b) {
    Block block;
    for (int u = 1; u <= 3; ++u) {
      const int dilation = u == 2 ? DilationRate(b, cfg.max_dilation) : 1;
      block.unit[u - 1] = ConvUnit::Load(w, MagnitudeBlockPrefix(b, u), dilation);
    }
    core.blocks_.push_back(std::move(block));
  }
  core.out_ = Linear::Load(w, "mag.out");
  return core;
}

CoreState MagnitudeCore::NewState() const {
  CoreState s;
  for (const Block& block : blocks_) {
    for (const ConvUnit& u : block.unit) {
      s.histories_.emplace_back(u.in_width(), u.history_length(), false);
    }
  }
  s.initialized_ = true;
  return s;
}

Vector MagnitudeCore::Forward(const Vector& log_mag_e, const Vector& log_mag_y,
                              CoreState& state) const {
  CheckState(state);
  CheckInput(log_mag_e, cfg_.bins, "magnitude core");
  CheckInput(log_mag_y, cfg_.bins, "magnitude core");
  Vector h = Concat(in_e_.Forward(log_mag_e), in_y_.Forward(log_mag_y));
  size_t slot = 0;
  for (const Block& block : blocks_) {
    Vector x = h;
    for (const ConvUnit& u : block.unit) x = u.Forward(x, state.histories_[slot++]);
    h += x;
  }
  ++state.frames_;
  Vector mask = out_.Forward(h);
  for (auto& v : mask) v = Sigmoid(v);
  return mask;
}

ComplexCore ComplexCore::Load(const ModelWeights& w, const ModelConfig& cfg) {
  cfg.Validate();
  ComplexCore core;
  core.cfg_ = cfg;
  core.in_e_ = ComplexFcCustom::Load(w, "cplx.in_e");
  core.in_y_ = ComplexFcCustom::Load(w, "cplx.in_y");
  for (int b = 1; b <= cfg.num_blocks; ++b) {
    ComplexBlock block;
    for (int u = 1; u <= 3; ++u) {
      const int dilation = u == 2 ? DilationRate(b, cfg.max_dilation) : 1;
      block.unit[u - 1] = ComplexConvUnit::Load(w, ComplexBlockPrefix(b, u), dilation);
    }
    core.blocks_.push_back(std::move(block));
  }
  core.out_re_ = Linear::Load(w, "cplx.out_re");
  core.out_im_ = Linear::Load(w, "cplx.out_im");
  return core;
}

CoreState ComplexCore::NewState() const {
  CoreState s;
  for (const ComplexBlock& block : blocks_) {
    for (const ComplexConvUnit& u : block.unit) {
      s.histories_.emplace_back(u.in_width(), u.history_length(), true);
    }
  }
  s.initialized_ = true;
  return s;
}

std::pair<Vector, Vector> ComplexCore::Forward(const ComplexVector& masked,
                                               const ComplexVector& echo,
                                               CoreState& state) const {
  CheckState(state);
  CheckInput(masked.re, cfg_.bins, "complex core");
  CheckInput(masked.im, cfg_.bins, "complex core");
  CheckInput(echo.re, cfg_.bins, "complex core");
  CheckInput(echo.im, cfg_.bins, "complex core");
  const ComplexVector a = in_e_.Forward(masked);
  const ComplexVector b = in_y_.Forward(echo);
  ComplexVector h{Concat(a.re, b.re), Concat(a.im, b.im)};
  size_t slot = 0;
  for (const ComplexBlock& block : blocks_) {
    ComplexVector x = h;
    for (const ComplexConvUnit& u : block.unit) x = u.Forward(x, state.histories_[slot++]);
    h.re += x.re;
    h.im += x.im;
  }
  ++state.frames_;
  const Vector both = Concat(h.re, h.im);
  return {out_re_.Forward(both), out_im_.Forward(both)};
}

Vector LogMagnitude(const Spectrum& x) {
  Vector out(static_cast<Eigen::Index>(x.size()));
  for (size_t k = 0; k < x.size(); ++k) {
    out[static_cast<Eigen::Index>(k)] = std::log(std::abs(x[k]) + kLogFloor);
  }
  return out;
}

ComplexVector ToComplexVector(const Spectrum& x) {
  const auto n = static_cast<Eigen::Index>(x.size());
  ComplexVector out{Vector(n), Vector(n)};
  for (Eigen::Index k = 0; k < n; ++k) {
    out.re[k] = x[k].real();
    out.im[k] = x[k].imag();
  }
  return out;
}

Spectrum PostProcess(const Vector& s_mag, const Vector& phase, const Vector& real_mask,
                     const Vector& imag_mask) {
  const Eigen::Index n = s_mag.size();
  if (phase.size() != n || real_mask.size() != n || imag_mask.size() != n) {
    throw DataError("post-process: bin count mismatch");
  }
  Spectrum out(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const double mr = real_mask[k], mi = imag_mask[k];
    if (!std::isfinite(mr) || !std::isfinite(mi)) {
      throw DataError("post-process: non-finite mask at bin " + std::to_string(k));
    }
    const double gain = std::min(std::tanh(std::hypot(mr, mi)), kMaxMaskGain);
    const double mask_phase = (mr == 0.0 && mi == 0.0) ? 0.0 : std::atan2(mi, mr);
    out[k] = std::polar(s_mag[k] * gain, phase[k] + mask_phase);
  }
  return out;
}

MctcnModel::MctcnModel(const ModelWeights& weights, const ModelConfig& cfg)
    : cfg_(cfg),
      magnitude_(MagnitudeCore::Load(weights, cfg)),
      complex_(ComplexCore::Load(weights, cfg)) {}

ModelState MctcnModel::NewState() const {
  return {magnitude_.NewState(), complex_.NewState()};
}

ModelOutput MctcnModel::Process(const Spectrum& error, const Spectrum& echo,
                                ModelState& state) const {
  ModelOutput out;
  out.masks.mag_mask = magnitude_.Forward(LogMagnitude(error), LogMagnitude(echo),
                                          state.magnitude);
  const auto n = static_cast<Eigen::Index>(error.size());
  out.s_mag.resize(n);
  Vector phase(n);
  Spectrum masked(error.size());
  for (Eigen::Index k = 0; k < n; ++k) {
    const Complex e = error[k];
    out.s_mag[k] = out.masks.mag_mask[k] * std::abs(e);
    phase[k] = (e == Complex(0.0, 0.0)) ? 0.0 : std::arg(e);
    masked[k] = out.masks.mag_mask[k] * e;
  }
  auto [mr, mi] = complex_.Forward(ToComplexVector(masked), ToComplexVector(echo),
                                   state.complex);
  out.masks.real_mask = std::move(mr);
  out.masks.imag_mask = std::move(mi);
  out.enhanced = PostProcess(out.s_mag, phase, out.masks.real_mask, out.masks.imag_mask);
  return out;
}

}  // namespace aecns::mctcn
