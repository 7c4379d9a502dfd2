// Copyright 2026 The aecns Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "aecns/mctcn/layers.h"

#include <cmath>

namespace aecns::mctcn {

Vector LoadVector(const ModelWeights& w, const std::string& name) {
  const Tensor& t = w.Get(name);
  if (t.shape.size() != 1) {
    throw WeightFileError(WeightFileError::Kind::kShapeMismatch, name, "expected rank 1");
  }
  Vector v(static_cast<Eigen::Index>(t.data.size()));
  for (size_t i = 0; i < t.data.size(); ++i) v[static_cast<Eigen::Index>(i)] = t.data[i];
  return v;
}

Matrix LoadMatrix(const ModelWeights& w, const std::string& name) {
  const Tensor& t = w.Get(name);
  if (t.shape.size() != 2) {
    throw WeightFileError(WeightFileError::Kind::kShapeMismatch, name, "expected rank 2");
  }
  Matrix m(t.shape[0], t.shape[1]);
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = t.data[r * m.cols() + c];
  }
  return m;
}

namespace {

// Splits an [out, in, kernel] tensor into per-tap [out, in] matrices.
std::vector<Matrix> LoadTaps(const ModelWeights& w, const std::string& name) {
  const Tensor& t = w.Get(name);
  if (t.shape.size() != 3) {
    throw WeightFileError(WeightFileError::Kind::kShapeMismatch, name, "expected rank 3");
  }
  const uint32_t out = t.shape[0], in = t.shape[1], k = t.shape[2];
  std::vector<Matrix> taps(k, Matrix(out, in));
  for (uint32_t o = 0; o < out; ++o) {
    for (uint32_t c = 0; c < in; ++c) {
      for (uint32_t i = 0; i < k; ++i) {
        taps[i](o, c) = t.data[(static_cast<size_t>(o) * in + c) * k + i];
      }
    }
  }
  return taps;
}

}  // namespace

Linear Linear::Load(const ModelWeights& w, const std::string& prefix) {
  return {LoadMatrix(w, prefix + ".weight"), LoadVector(w, prefix + ".bias")};
}

Vector Linear::Forward(const Vector& x) const {
  Vector y = bias;
  y.noalias() += weight * x;
  return y;
}

LayerNorm LayerNorm::Load(const ModelWeights& w, const std::string& gain_name,
                          const std::string& bias_name) {
  return {LoadVector(w, gain_name), LoadVector(w, bias_name)};
}

Vector LayerNorm::Forward(const Vector& x) const {
  const double mean = x.mean();
  const double var = (x.array() - mean).square().mean();
  const double inv = 1.0 / std::sqrt(var + kLayerNormEpsilon);
  return ((x.array() - mean) * inv * gain.array() + bias.array()).matrix();
}

PRelu PRelu::Load(const ModelWeights& w, const std::string& name) {
  return {LoadVector(w, name)};
}

Vector PRelu::Forward(const Vector& x) const {
  return (x.array() >= 0.0).select(x.array(), x.array() * slope.array()).matrix();
}

FcCustom FcCustom::Load(const ModelWeights& w, const std::string& prefix) {
  return {Linear::Load(w, prefix + ".fc"),
          LayerNorm::Load(w, prefix + ".ln.gain", prefix + ".ln.bias"),
          PRelu::Load(w, prefix + ".prelu")};
}

Vector FcCustom::Forward(const Vector& x) const {
  return act.Forward(ln.Forward(fc.Forward(x)));
}

ComplexLinear ComplexLinear::Load(const ModelWeights& w, const std::string& prefix) {
  return {Linear{LoadMatrix(w, prefix + ".weight.re"), LoadVector(w, prefix + ".bias.re")},
          Linear{LoadMatrix(w, prefix + ".weight.im"), LoadVector(w, prefix + ".bias.im")}};
}

ComplexVector ComplexLinear::Forward(const ComplexVector& x) const {
  ComplexVector y{re.bias, im.bias};
  y.re.noalias() += re.weight * x.re;
  y.re.noalias() -= im.weight * x.im;
  y.im.noalias() += re.weight * x.im;
  y.im.noalias() += im.weight * x.re;
  return y;
}

ComplexLayerNorm ComplexLayerNorm::Load(const ModelWeights& w, const std::string& prefix) {
  return {LayerNorm::Load(w, prefix + ".gain.re", prefix + ".bias.re"),
          LayerNorm::Load(w, prefix + ".gain.im", prefix + ".bias.im")};
}

ComplexVector ComplexLayerNorm::Forward(const ComplexVector& x) const {
  return {re.Forward(x.re), im.Forward(x.im)};
}

ComplexFcCustom ComplexFcCustom::Load(const ModelWeights& w, const std::string& prefix) {
  return {ComplexLinear::Load(w, prefix + ".fc"), ComplexLayerNorm::Load(w, prefix + ".ln"),
          PRelu::Load(w, prefix + ".prelu")};
}

ComplexVector ComplexFcCustom::Forward(const ComplexVector& x) const {
  const ComplexVector z = ln.Forward(fc.Forward(x));
  return {act.Forward(z.re), act.Forward(z.im)};
}

FrameHistory::FrameHistory(int width, int length, bool complex)
    : width_(width),
      length_(length),
      re_(Eigen::MatrixXd::Zero(width, length)),
      im_(complex ? Eigen::MatrixXd::Zero(width, length) : Eigen::MatrixXd()) {}

void FrameHistory::Push(const Vector& re) {
  if (length_ == 0) return;
  re_.col(head_) = re;
  head_ = (head_ + 1) % length_;
}

void FrameHistory::Push(const Vector& re, const Vector& im) {
  if (length_ == 0) return;
  re_.col(head_) = re;
  im_.col(head_) = im;
  head_ = (head_ + 1) % length_;
}

ConvUnit ConvUnit::Load(const ModelWeights& w, const std::string& prefix, int dilation) {
  ConvUnit u;
  u.act = PRelu::Load(w, prefix + ".prelu");
  u.ln = LayerNorm::Load(w, prefix + ".ln.gain", prefix + ".ln.bias");
  u.taps = LoadTaps(w, prefix + ".conv.weight");
  u.bias = LoadVector(w, prefix + ".conv.bias");
  u.dilation = dilation;
  return u;
}

Vector ConvUnit::Forward(const Vector& x, FrameHistory& history) const {
  const Vector z = ln.Forward(act.Forward(x));
  const int k = kernel();
  Vector y = bias;
  y.noalias() += taps[k - 1] * z;
  for (int i = 0; i + 1 < k; ++i) {
    y.noalias() += taps[i] * history.Real((k - 1 - i) * dilation);
  }
  history.Push(z);
  return y;
}

ComplexConvUnit ComplexConvUnit::Load(const ModelWeights& w, const std::string& prefix,
                                      int dilation) {
  ComplexConvUnit u;
  u.act = PRelu::Load(w, prefix + ".prelu");
  u.ln = ComplexLayerNorm::Load(w, prefix + ".ln");
  u.taps_re = LoadTaps(w, prefix + ".conv.weight.re");
  u.taps_im = LoadTaps(w, prefix + ".conv.weight.im");
  u.bias_re = LoadVector(w, prefix + ".conv.bias.re");
  u.bias_im = LoadVector(w, prefix + ".conv.bias.im");
  u.dilation = dilation;
  return u;
}

ComplexVector ComplexConvUnit::Forward(const ComplexVector& x, FrameHistory& history) const {
  const ComplexVector z = ln.Forward({act.Forward(x.re), act.Forward(x.im)});
  const int k = kernel();
  ComplexVector y{bias_re, bias_im};
  auto accumulate = [&](int i, const auto& zr, const auto& zi) {
    y.re.noalias() += taps_re[i] * zr;
    y.re.noalias() -= taps_im[i] * zi;
    y.im.noalias() += taps_re[i] * zi;
    y.im.noalias() += taps_im[i] * zr;
  };
  accumulate(k - 1, z.re, z.im);
  for (int i = 0; i + 1 < k; ++i) {
    const int lag = (k - 1 - i) * dilation;
    accumulate(i, history.Real(lag), history.Imag(lag));
  }
  history.Push(z.re, z.im);
  return y;
}

}  // namespace aecns::mctcn
